//! Pruning around a state and the state sets induced by the surviving labels.

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{LabelSet, Network, State};
use crate::search::for_each_state;

/// Default upper bound on the number of states in an enumerated pruned space.
pub const DEFAULT_PRUNED_CAP: usize = 1_000_000;

/// How the next Prune Sampling state is drawn from the retained labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruneMode {
    /// Enumerate every state spanned by the retained labels.
    #[default]
    Exact,
    /// Collect at most `size` distinct states by random forward sampling
    /// restricted to the retained labels, using at most `budget` attempts.
    Bounded { size: usize, budget: usize },
}

impl FromStr for PruneMode {
    type Err = Error;

    /// Parses `exact` or `bounded:SIZE:BUDGET`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("prune mode `{s}`: expected exact or bounded:SIZE:BUDGET"));
        let mut parts = s.split(':');
        match parts.next() {
            Some("exact") if parts.next().is_none() => Ok(PruneMode::Exact),
            Some("bounded") => {
                let size = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                let budget = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                if parts.next().is_some() || size == 0 {
                    return Err(bad());
                }
                Ok(PruneMode::Bounded { size, budget })
            }
            _ => Err(bad()),
        }
    }
}

/// The retained labels and the states they span.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedSpace {
    retained: LabelSet,
    width: usize,
    states: Vec<usize>,
    origin: Option<State>,
}

impl PrunedSpace {
    pub fn retained(&self) -> &LabelSet {
        &self.retained
    }

    pub fn len(&self) -> usize {
        self.states.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[usize] {
        &self.states[i * self.width..(i + 1) * self.width]
    }

    pub fn states(&self) -> impl Iterator<Item = &[usize]> {
        self.states.chunks_exact(self.width.max(1))
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.states().any(|s| s == x)
    }

    /// The state the labels were pruned around, if recorded.
    pub fn origin(&self) -> Option<&[usize]> {
        self.origin.as_deref()
    }

    /// Records the state this space was pruned around; it must be a member.
    pub fn with_origin(mut self, x: &[usize]) -> Result<Self> {
        if !self.contains(x) {
            return Err(Error::InvalidAssignment(
                "origin is not a member of the pruned space".into(),
            ));
        }
        self.origin = Some(x.to_vec());
        Ok(self)
    }
}

/// Draws the retained label set around a feasible `x`.
///
/// Labels selected by `x` are always kept; every other label survives with
/// probability equal to its CPT value.
pub fn prune_around<R: Rng + ?Sized>(net: &Network, x: &[usize], rng: &mut R) -> Result<LabelSet> {
    if !net.is_feasible(x)? {
        return Err(Error::Infeasible);
    }
    let mut retained = LabelSet::empty(net.num_labels());
    prune_into(net, x, rng, &mut retained);
    Ok(retained)
}

/// `prune_around` without validation, reusing `retained`.
pub(crate) fn prune_into<R: Rng + ?Sized>(net: &Network, x: &[usize], rng: &mut R, retained: &mut LabelSet) {
    let values = net.cpts().iter().flat_map(|c| c.values());
    for (i, &c) in values.enumerate() {
        // gen() is in [0, 1): c = 0 never survives, c = 1 always does
        if c > 0.0 && rng.gen::<f64>() < c {
            retained.insert(i);
        } else {
            retained.remove(i);
        }
    }
    for i in net.label_indices_of(x) {
        retained.insert(i);
    }
}

/// Lists every state whose labels all lie in `retained`.
pub fn enumerate_pruned(net: &Network, retained: &LabelSet, cap: usize) -> Result<PrunedSpace> {
    if retained.capacity() != net.num_labels() {
        return Err(Error::InvalidParameter(format!(
            "label set sized for {} labels, network has {}",
            retained.capacity(),
            net.num_labels()
        )));
    }
    let mask = retained.as_mask();
    let width = net.num_vars();
    let mut states = Vec::new();
    let mut count = 0;
    let flow = for_each_state(
        net,
        |i| mask[i],
        |x, _| {
            if count == cap {
                return ControlFlow::Break(());
            }
            count += 1;
            states.extend_from_slice(x);
            ControlFlow::Continue(())
        },
    );
    if flow.is_break() {
        return Err(Error::PrunedSpaceTooLarge { cap });
    }
    Ok(PrunedSpace {
        retained: retained.clone(),
        width,
        states,
        origin: None,
    })
}

/// A uniformly chosen member of `space`.
pub fn uniform_draw<R: Rng + ?Sized>(space: &PrunedSpace, rng: &mut R) -> Result<State> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(space.state(rng.gen_range(0..space.len())).to_vec())
}

/// A set of at most `size` distinct states spanned by `retained`, found by
/// random forward sampling over retained positive labels with restarts on dead
/// ends. Each attempt counts against `budget`.
pub fn bounded_candidates<R: Rng + ?Sized>(
    net: &Network,
    retained: &LabelSet,
    size: usize,
    budget: usize,
    rng: &mut R,
) -> Result<PrunedSpace> {
    if size == 0 {
        return Err(Error::InvalidParameter("candidate set size must be at least 1".into()));
    }
    if retained.capacity() != net.num_labels() {
        return Err(Error::InvalidParameter(format!(
            "label set sized for {} labels, network has {}",
            retained.capacity(),
            net.num_labels()
        )));
    }
    let mask = retained.as_mask();
    let width = net.num_vars();
    let mut seen: HashSet<State> = HashSet::new();
    let mut states = Vec::new();
    let mut x = vec![0; width];
    let mut admissible = Vec::new();
    'attempts: for _ in 0..budget {
        for &var in net.topological_order() {
            let config = net.parent_config(var, &x);
            let column = net.cpt(var).column(config);
            admissible.clear();
            admissible.extend(
                (0..column.len()).filter(|&s| column[s] > 0.0 && mask[net.label_index_raw(var, s, config)]),
            );
            if admissible.is_empty() {
                continue 'attempts;
            }
            x[var] = admissible[rng.gen_range(0..admissible.len())];
        }
        if seen.insert(x.clone()) {
            states.extend_from_slice(&x);
            if seen.len() == size {
                break;
            }
        }
    }
    if states.is_empty() {
        return Err(Error::RetryBudgetExhausted(budget));
    }
    Ok(PrunedSpace {
        retained: retained.clone(),
        width,
        states,
        origin: None,
    })
}
