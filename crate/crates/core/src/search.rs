//! Derivative-free coordinate pattern search.

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub final_step: f64,
    pub converged: bool,
}

/// Polls `x ± step·e_k` over all coordinates in random order, moving to the
/// first improvement and then trying one more step in the same direction.
/// When no coordinate improves, the step is halved.
pub(crate) fn pattern_search<R: Rng + ?Sized>(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: Vec<f64>,
    opts: SearchOptions,
    rng: &mut R,
) -> SearchOutcome {
    let dim = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut step = opts.initial_step;
    let mut order: Vec<usize> = (0..2 * dim).collect();
    let mut trial = x.clone();

    for _ in 0..opts.max_iters {
        if step < opts.min_step {
            break;
        }
        order.shuffle(rng);
        let mut improved = false;
        for &dir in &order {
            let k = dir / 2;
            let sign = if dir % 2 == 0 { 1.0 } else { -1.0 };
            trial[k] = x[k] + sign * step;
            let ft = f(&trial);
            if ft < fx {
                x[k] = trial[k];
                fx = ft;
                improved = true;
                trial[k] = x[k] + sign * step;
                let fe = f(&trial);
                if fe < fx {
                    x[k] = trial[k];
                    fx = fe;
                } else {
                    trial[k] = x[k];
                }
            } else {
                trial[k] = x[k];
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    SearchOutcome {
        x,
        value: fx,
        final_step: step,
        converged: step < opts.min_step,
    }
}
