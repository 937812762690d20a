//! Brute-force convolution evaluator: `H` by direct window integration on a
//! uniform grid, crossings by linear interpolation.

use crate::error::Result;
use crate::kernel::BoundedKernel;
use crate::signal::BooleanSignal;

use super::efficient::{check_step, verdict_end};
use super::verdict::{interpolate, VerdictBuilder, VerdictSignal};

pub fn eval_conv_oracle(kernel: &BoundedKernel, p: f64, b: &BooleanSignal, grid: f64) -> Result<VerdictSignal> {
    check_step(grid)?;
    super::check_horizon(kernel, b)?;
    let d0 = b.start();
    let te = verdict_end(kernel, d0, b.end()).expect("horizon checked");
    let mass = |t: f64| kernel.window_mass(b.intervals(), t);
    let mut builder = VerdictBuilder::new(p, d0);
    let lin = interpolate(builder.threshold());
    builder.first(d0, mass(d0));
    let mut k = 1u64;
    loop {
        let t = d0 + k as f64 * grid;
        if t >= te {
            break;
        }
        builder.step(t, mass(t), &lin);
        k += 1;
    }
    if te > d0 {
        builder.step(te, mass(te), &lin);
    }
    Ok(builder.finish())
}
