use std::ops::ControlFlow;

use crate::network::{Network, VarId};

/// Depth-first extension of partial assignments in topological order.
///
/// A value of a variable is tried only if its CPT entry under the already
/// assigned parents is positive and `admit(label_index)` holds. `visit` sees
/// every complete assignment built this way and may stop the search.
pub(crate) fn for_each_state<A, V>(net: &Network, admit: A, mut visit: V) -> ControlFlow<()>
where
    A: Fn(usize) -> bool,
    V: FnMut(&[usize], f64) -> ControlFlow<()>,
{
    let mut x = vec![0; net.num_vars()];
    extend(net, net.topological_order(), 0, &mut x, 1.0, &admit, &mut visit)
}

fn extend<A, V>(
    net: &Network,
    order: &[VarId],
    depth: usize,
    x: &mut Vec<usize>,
    weight: f64,
    admit: &A,
    visit: &mut V,
) -> ControlFlow<()>
where
    A: Fn(usize) -> bool,
    V: FnMut(&[usize], f64) -> ControlFlow<()>,
{
    let Some(&var) = order.get(depth) else {
        return visit(x, weight);
    };
    let config = net.parent_config(var, x);
    let column = net.cpt(var).column(config);
    let base = net.label_offset(var) + config * column.len();
    for (s, &c) in column.iter().enumerate() {
        if c > 0.0 && admit(base + s) {
            x[var] = s;
            extend(net, order, depth + 1, x, weight * c, admit, visit)?;
        }
    }
    ControlFlow::Continue(())
}
