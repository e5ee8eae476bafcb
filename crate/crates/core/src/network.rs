//! Discrete Bayesian network model.
//!
//! A [`Network`] owns its variables and one CPT per variable. Every CPT entry is
//! addressable as a [`CptLabel`]; labels also have a dense integer index so that
//! sets of labels can be stored as bit masks ([`LabelSet`]).
//!
//! Parent configurations are indexed mixed-radix over the CPT's parent order with
//! the last parent varying fastest. Within a CPT the values are stored column by
//! column: all child states of configuration 0, then configuration 1, and so on.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};

pub type VarId = usize;

/// A full assignment: one state index per variable, indexed by [`VarId`].
pub type State = Vec<usize>;

/// Column normalization tolerance applied at construction time.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<VarId>,
}

impl Variable {
    pub fn new(
        id: VarId,
        name: impl Into<String>,
        states: impl IntoIterator<Item = impl Into<String>>,
        parents: Vec<VarId>,
    ) -> Self {
        Variable {
            id,
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
            parents,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: VarId,
    parent_order: Vec<VarId>,
    cardinality: usize,
    values: Vec<f64>,
}

impl Cpt {
    /// Builds a CPT from column-major values (child state fastest).
    pub fn new(child: VarId, parent_order: Vec<VarId>, cardinality: usize, values: Vec<f64>) -> Self {
        Cpt {
            child,
            parent_order,
            cardinality,
            values,
        }
    }

    pub fn from_columns(child: VarId, parent_order: Vec<VarId>, columns: Vec<Vec<f64>>) -> Self {
        let cardinality = columns.first().map_or(0, Vec::len);
        let values = columns.into_iter().flatten().collect();
        Cpt::new(child, parent_order, cardinality, values)
    }

    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parent_order(&self) -> &[VarId] {
        &self.parent_order
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_columns(&self) -> usize {
        self.values.len().checked_div(self.cardinality).unwrap_or(0)
    }

    pub fn column(&self, config: usize) -> &[f64] {
        let start = config * self.cardinality;
        &self.values[start..start + self.cardinality]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.cardinality.max(1))
    }

    pub fn value(&self, state: usize, config: usize) -> f64 {
        self.values[config * self.cardinality + state]
    }
}

/// One addressable CPT entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CptLabel {
    pub variable: VarId,
    pub child_state: usize,
    pub parent_config: usize,
}

/// A set of CPT labels of one network, stored as a mask over dense label indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabelSet {
    mask: Vec<bool>,
}

impl LabelSet {
    pub fn empty(num_labels: usize) -> Self {
        LabelSet {
            mask: vec![false; num_labels],
        }
    }

    pub fn full(num_labels: usize) -> Self {
        LabelSet {
            mask: vec![true; num_labels],
        }
    }

    pub fn capacity(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn contains(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn insert(&mut self, index: usize) -> bool {
        !std::mem::replace(&mut self.mask[index], true)
    }

    pub fn remove(&mut self, index: usize) -> bool {
        std::mem::replace(&mut self.mask[index], false)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn difference(&self, other: &LabelSet) -> LabelSet {
        LabelSet {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a && !b)
                .collect(),
        }
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        LabelSet {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    pub(crate) fn as_mask(&self) -> &[bool] {
        &self.mask
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A partial (or full) mapping from variables to state indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    values: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(num_vars: usize) -> Self {
        Assignment {
            values: vec![None; num_vars],
        }
    }

    pub fn from_full(state: &[usize]) -> Self {
        Assignment {
            values: state.iter().copied().map(Some).collect(),
        }
    }

    pub fn from_pairs(num_vars: usize, pairs: impl IntoIterator<Item = (VarId, usize)>) -> Self {
        let mut a = Assignment::empty(num_vars);
        for (var, state) in pairs {
            a.set(var, state);
        }
        a
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.values.get(var).copied().flatten()
    }

    pub fn set(&mut self, var: VarId, state: usize) {
        if var >= self.values.len() {
            self.values.resize(var + 1, None);
        }
        self.values[var] = Some(state);
    }

    pub fn clear(&mut self, var: VarId) {
        if let Some(v) = self.values.get_mut(var) {
            *v = None;
        }
    }

    /// Number of assigned variables.
    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn to_full(&self) -> Option<State> {
        self.values.iter().copied().collect()
    }

    pub fn assigned(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(var, v)| v.map(|s| (var, s)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: String,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    topo_order: Vec<VarId>,
    children: Vec<Vec<VarId>>,
    strides: Vec<Vec<usize>>,
    label_offsets: Vec<usize>,
    evidence: Assignment,
}

impl Network {
    /// Builds and validates a network using the default normalization tolerance.
    pub fn new(name: impl Into<String>, variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self> {
        Network::with_tolerance(name, variables, cpts, NORMALIZATION_TOLERANCE)
    }

    pub fn with_tolerance(
        name: impl Into<String>,
        variables: Vec<Variable>,
        cpts: Vec<Cpt>,
        tolerance: f64,
    ) -> Result<Self> {
        let n = variables.len();
        Network::from_parts(name.into(), variables, cpts, Assignment::empty(n), tolerance)
    }

    /// Builds a network whose evidence variables carry reduced CPTs.
    ///
    /// Columns of evidence variables are exempt from normalization but must be
    /// zero away from the observed state.
    pub fn from_parts(
        name: String,
        variables: Vec<Variable>,
        mut cpts: Vec<Cpt>,
        evidence: Assignment,
        tolerance: f64,
    ) -> Result<Self> {
        let n = variables.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("network has no variables".into()));
        }
        let mut names = HashSet::new();
        for (i, var) in variables.iter().enumerate() {
            if var.id != i {
                return Err(Error::InvalidNetwork(format!(
                    "variable `{}` has id {} at position {i}",
                    var.name, var.id
                )));
            }
            if !names.insert(var.name.as_str()) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate variable name `{}`",
                    var.name
                )));
            }
            if var.states.is_empty() {
                return Err(Error::InvalidNetwork(format!(
                    "variable `{}` has no states",
                    var.name
                )));
            }
            let unique: HashSet<_> = var.states.iter().collect();
            if unique.len() != var.states.len() {
                return Err(Error::InvalidNetwork(format!(
                    "variable `{}` has duplicate state names",
                    var.name
                )));
            }
            let mut seen = HashSet::new();
            for &p in &var.parents {
                if p >= n {
                    return Err(Error::InvalidNetwork(format!(
                        "variable `{}` has unknown parent id {p}",
                        var.name
                    )));
                }
                if p == i {
                    return Err(Error::InvalidNetwork(format!(
                        "variable `{}` is its own parent",
                        var.name
                    )));
                }
                if !seen.insert(p) {
                    return Err(Error::InvalidNetwork(format!(
                        "variable `{}` lists parent `{}` twice",
                        var.name, variables[p].name
                    )));
                }
            }
        }
        if evidence.num_vars() != n {
            return Err(Error::InvalidAssignment(format!(
                "evidence covers {} variables, network has {n}",
                evidence.num_vars()
            )));
        }

        let topo_order = topological_order(&variables)?;

        if cpts.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{} CPTs for {n} variables",
                cpts.len()
            )));
        }
        cpts.sort_by_key(Cpt::child);
        for (i, cpt) in cpts.iter().enumerate() {
            if cpt.child != i {
                return Err(Error::InvalidNetwork(format!(
                    "variable `{}` has no CPT or more than one",
                    variables.get(i).map_or("?", |v| v.name.as_str())
                )));
            }
            let var = &variables[i];
            if cpt.parent_order != var.parents {
                return Err(Error::InvalidNetwork(format!(
                    "CPT parent order of `{}` does not match its parents",
                    var.name
                )));
            }
            if cpt.cardinality != var.cardinality() {
                return Err(Error::InvalidNetwork(format!(
                    "CPT of `{}` has {} rows, expected {}",
                    var.name,
                    cpt.cardinality,
                    var.cardinality()
                )));
            }
            let columns: usize = var.parents.iter().map(|&p| variables[p].cardinality()).product();
            if cpt.values.len() != columns * var.cardinality() {
                return Err(Error::InvalidNetwork(format!(
                    "CPT of `{}` has {} entries, expected {}",
                    var.name,
                    cpt.values.len(),
                    columns * var.cardinality()
                )));
            }
            if let Some(bad) = cpt.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidNetwork(format!(
                    "CPT of `{}` has entry {bad} outside [0, 1]",
                    var.name
                )));
            }
            match evidence.get(i) {
                Some(observed) => {
                    if observed >= var.cardinality() {
                        return Err(Error::StateOutOfRange {
                            variable: var.name.clone(),
                            state: observed,
                            cardinality: var.cardinality(),
                        });
                    }
                    for (column, values) in cpt.columns().enumerate() {
                        if values
                            .iter()
                            .enumerate()
                            .any(|(s, &v)| s != observed && v != 0.0)
                        {
                            return Err(Error::InvalidNetwork(format!(
                                "reduced CPT of evidence variable `{}` has mass off the observed state in column {column}",
                                var.name
                            )));
                        }
                    }
                }
                None => {
                    for (column, values) in cpt.columns().enumerate() {
                        let sum: f64 = values.iter().sum();
                        if (sum - 1.0).abs() > tolerance {
                            return Err(Error::Normalization {
                                variable: var.name.clone(),
                                column,
                                sum,
                                tolerance,
                            });
                        }
                    }
                }
            }
        }

        let mut children = vec![Vec::new(); n];
        for var in &variables {
            for &p in &var.parents {
                children[p].push(var.id);
            }
        }
        let strides = variables
            .iter()
            .map(|var| {
                let mut strides = vec![0; var.parents.len()];
                let mut acc = 1;
                for (k, &p) in var.parents.iter().enumerate().rev() {
                    strides[k] = acc;
                    acc *= variables[p].cardinality();
                }
                strides
            })
            .collect();
        let mut label_offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for cpt in &cpts {
            label_offsets.push(acc);
            acc += cpt.values.len();
        }
        label_offsets.push(acc);

        Ok(Network {
            name,
            variables,
            cpts,
            topo_order,
            children,
            strides,
            label_offsets,
            evidence,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn variable_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id].cardinality()
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, id: VarId) -> &Cpt {
        &self.cpts[id]
    }

    /// Variables ordered so that every parent precedes its children.
    pub fn topological_order(&self) -> &[VarId] {
        &self.topo_order
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id]
    }

    pub fn evidence(&self) -> &Assignment {
        &self.evidence
    }

    pub fn is_evidence(&self, id: VarId) -> bool {
        self.evidence.get(id).is_some()
    }

    /// Total number of CPT entries, i.e. the size of the label universe.
    pub fn num_labels(&self) -> usize {
        self.label_offsets[self.variables.len()]
    }

    /// Total number of full assignments, saturating at `u128::MAX`.
    pub fn state_space_size(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.cardinality() as u128))
    }

    /// Mixed-radix parent configuration index of `var` under `x`.
    ///
    /// Only the parents of `var` are read, so `x` may be a partially filled buffer
    /// as long as those entries are set.
    #[inline]
    pub fn parent_config(&self, var: VarId, x: &[usize]) -> usize {
        self.variables[var]
            .parents
            .iter()
            .zip(&self.strides[var])
            .map(|(&p, &s)| x[p] * s)
            .sum()
    }

    #[inline]
    pub fn label_index(&self, label: &CptLabel) -> usize {
        self.label_offsets[label.variable]
            + label.parent_config * self.variables[label.variable].cardinality()
            + label.child_state
    }

    #[inline]
    pub(crate) fn label_index_raw(&self, var: VarId, state: usize, config: usize) -> usize {
        self.label_offsets[var] + config * self.variables[var].cardinality() + state
    }

    /// Offset of the first label belonging to `var`.
    #[inline]
    pub(crate) fn label_offset(&self, var: VarId) -> usize {
        self.label_offsets[var]
    }

    pub fn label_at(&self, index: usize) -> CptLabel {
        assert!(index < self.num_labels(), "label index {index} out of range");
        let variable = self.label_offsets.partition_point(|&o| o <= index) - 1;
        let local = index - self.label_offsets[variable];
        let card = self.variables[variable].cardinality();
        CptLabel {
            variable,
            child_state: local % card,
            parent_config: local / card,
        }
    }

    pub fn label_value(&self, label: &CptLabel) -> f64 {
        self.cpts[label.variable].value(label.child_state, label.parent_config)
    }

    #[inline]
    pub fn label_value_at(&self, index: usize) -> f64 {
        let label = self.label_at(index);
        self.label_value(&label)
    }

    /// Flat vector of every label's CPT value, indexed by label index.
    pub fn label_values(&self) -> Vec<f64> {
        self.cpts.iter().flat_map(|c| c.values.iter().copied()).collect()
    }

    /// Human-readable label name in the `Name(k)` style, where `k` counts CPT
    /// cells row by row (child state major) starting at 1.
    pub fn label_name(&self, label: &CptLabel) -> String {
        let columns = self.cpts[label.variable].num_columns();
        format!(
            "{}({})",
            self.variables[label.variable].name,
            label.child_state * columns + label.parent_config + 1
        )
    }

    pub fn labels(&self, set: &LabelSet) -> BTreeSet<CptLabel> {
        set.iter().map(|i| self.label_at(i)).collect()
    }

    pub fn label_set(&self, labels: impl IntoIterator<Item = CptLabel>) -> LabelSet {
        let mut set = LabelSet::empty(self.num_labels());
        for label in labels {
            set.insert(self.label_index(&label));
        }
        set
    }

    /// Checks that `x` is a full assignment with in-range state indices.
    pub fn check_full(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.num_vars() {
            return Err(Error::InvalidAssignment(format!(
                "full assignment needs {} values, got {}",
                self.num_vars(),
                x.len()
            )));
        }
        for (var, &s) in x.iter().enumerate() {
            let card = self.cardinality(var);
            if s >= card {
                return Err(Error::StateOutOfRange {
                    variable: self.variables[var].name.clone(),
                    state: s,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }

    pub fn check_partial(&self, e: &Assignment) -> Result<()> {
        if e.num_vars() > self.num_vars() {
            return Err(Error::InvalidAssignment(format!(
                "assignment covers {} variables, network has {}",
                e.num_vars(),
                self.num_vars()
            )));
        }
        for (var, s) in e.assigned() {
            let card = self.cardinality(var);
            if s >= card {
                return Err(Error::StateOutOfRange {
                    variable: self.variables[var].name.clone(),
                    state: s,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }

    /// Dense label indices selected by a full assignment, one per variable.
    pub(crate) fn label_indices_of<'a>(&'a self, x: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        (0..self.num_vars()).map(move |v| self.label_index_raw(v, x[v], self.parent_config(v, x)))
    }

    /// The labels of the CPT entries selected by `x`.
    pub fn labels_of(&self, x: &[usize]) -> Result<LabelSet> {
        self.check_full(x)?;
        let mut set = LabelSet::empty(self.num_labels());
        for i in self.label_indices_of(x) {
            set.insert(i);
        }
        Ok(set)
    }

    #[inline]
    pub(crate) fn entry(&self, var: VarId, x: &[usize]) -> f64 {
        self.cpts[var].value(x[var], self.parent_config(var, x))
    }

    pub(crate) fn joint_unchecked(&self, x: &[usize]) -> f64 {
        (0..self.num_vars()).map(|v| self.entry(v, x)).product()
    }

    /// Product of the CPT values selected by `x`.
    pub fn joint_probability(&self, x: &[usize]) -> Result<f64> {
        self.check_full(x)?;
        Ok(self.joint_unchecked(x))
    }

    pub(crate) fn is_feasible_unchecked(&self, x: &[usize]) -> bool {
        (0..self.num_vars()).all(|v| self.entry(v, x) > 0.0)
    }

    pub fn is_feasible(&self, x: &[usize]) -> Result<bool> {
        self.check_full(x)?;
        Ok(self.is_feasible_unchecked(x))
    }

    /// Conditions the network on `e` by reducing the CPTs of the observed variables.
    ///
    /// For an observed variable every column keeps only the entry of the observed
    /// state, i.e. the likelihood `P(e_i | pa)`; all other entries become zero. The
    /// reduced CPT is then scaled so that its largest entry is 1. The scale factor
    /// is a constant, so the reduced joint stays proportional to `P(x, e)`, and a
    /// root or deterministically determined evidence variable ends up with pure
    /// indicator columns.
    pub fn reduce_evidence(&self, e: &Assignment) -> Result<Network> {
        self.check_partial(e)?;
        let n = self.num_vars();
        let mut cpts = self.cpts.clone();
        let mut evidence = self.evidence.clone();
        for (var, observed) in e.assigned() {
            let cpt = &mut cpts[var];
            let card = cpt.cardinality;
            let scale = cpt
                .values
                .iter()
                .skip(observed)
                .step_by(card)
                .fold(0.0f64, |m, &v| m.max(v));
            if scale == 0.0 {
                return Err(Error::ZeroEvidence);
            }
            for column in cpt.values.chunks_mut(card) {
                let kept = column[observed] / scale;
                column.fill(0.0);
                column[observed] = kept;
            }
            evidence.set(var, observed);
        }
        debug_assert_eq!(evidence.num_vars(), n);
        let reduced = Network {
            cpts,
            evidence,
            ..self.clone()
        };
        Ok(reduced)
    }

    /// Unnormalized Markov-blanket weights of every value of `var`, written into `out`.
    ///
    /// `x` is used as scratch and restored before returning.
    pub(crate) fn blanket_weights(&self, x: &mut [usize], var: VarId, out: &mut Vec<f64>) {
        let original = x[var];
        out.clear();
        for s in 0..self.cardinality(var) {
            x[var] = s;
            let mut w = self.entry(var, x);
            if w > 0.0 {
                for &c in &self.children[var] {
                    w *= self.entry(c, x);
                    if w == 0.0 {
                        break;
                    }
                }
            }
            out.push(w);
        }
        x[var] = original;
    }

    /// `P(X_var | x_{-var})`, computed from the Markov blanket of `var`.
    pub fn local_conditional(&self, x: &[usize], var: VarId) -> Result<Vec<f64>> {
        self.check_full(x)?;
        if var >= self.num_vars() {
            return Err(Error::InvalidParameter(format!("unknown variable id {var}")));
        }
        let mut scratch = x.to_vec();
        let mut weights = Vec::new();
        self.blanket_weights(&mut scratch, var, &mut weights);
        normalize_in_place(&mut weights)
            .ok_or_else(|| Error::StuckState(self.variables[var].name.clone()))?;
        Ok(weights)
    }

    /// Human-readable rendering of a full assignment.
    pub fn format_state(&self, x: &[usize]) -> String {
        let parts: Vec<String> = x
            .iter()
            .enumerate()
            .map(|(v, &s)| format!("{}={}", self.variables[v].name, self.variables[v].states[s]))
            .collect();
        format!("({})", parts.join(", "))
    }
}

/// Normalizes `w` to sum 1; returns `None` when the sum is zero.
pub(crate) fn normalize_in_place(w: &mut [f64]) -> Option<()> {
    let total: f64 = w.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return None;
    }
    for v in w.iter_mut() {
        *v /= total;
    }
    Some(())
}

/// Kahn's algorithm, always releasing the lowest ready id first so that an
/// already topological input order is preserved.
fn topological_order(variables: &[Variable]) -> Result<Vec<VarId>> {
    let n = variables.len();
    let mut indegree: Vec<usize> = variables.iter().map(|v| v.parents.len()).collect();
    let mut children = vec![Vec::new(); n];
    for v in variables {
        for &p in &v.parents {
            children[p].push(v.id);
        }
    }
    let mut ready: BTreeSet<VarId> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&v| indegree[v] > 0).unwrap_or(0);
        return Err(Error::Cycle(variables[stuck].name.clone()));
    }
    Ok(order)
}
