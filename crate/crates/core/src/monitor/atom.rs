use crate::error::Result;
use crate::formula::Atom;
use crate::signal::{BooleanSignal, Interval, PiecewiseConstantSignal};

/// Truth of a threshold predicate over `[0, duration]`.
pub fn eval_atom(s: &PiecewiseConstantSignal, atom: &Atom) -> Result<BooleanSignal> {
    let var = s.variable_index(&atom.variable)?;
    let raw = s
        .segments(var)
        .filter(|&(_, _, v)| atom.holds(v))
        .map(|(a, b, _)| Interval::new(a, b))
        .collect();
    Ok(BooleanSignal::normalized(0.0, s.duration(), raw))
}
