//! Derivative-free minimization by the Nelder–Mead simplex method.

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Converged once every vertex lies within `tolerance` of the best one
    /// (per coordinate) and the objective spread is below it too.
    pub tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 2000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as
/// `+∞`, which lets callers encode box constraints.
pub fn nelder_mead<const N: usize, F>(f: F, x0: [f64; N], opts: SimplexOptions) -> Minimum<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let eval = |x: &[f64; N]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, eval(&x0)));
    for i in 0..N {
        let mut x = x0;
        x[i] = if x[i] != 0.0 { 1.05 * x[i] } else { 2.5e-4 };
        simplex.push((x, eval(&x)));
    }

    let n = N as f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if is_converged(&simplex, opts.tolerance) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for j in 0..N {
                centroid[j] += x[j] / n;
            }
        }
        let along = |t: f64| {
            let worst = &simplex[N].0;
            let mut x = [0.0; N];
            for j in 0..N {
                x[j] = centroid[j] + t * (worst[j] - centroid[j]);
            }
            x
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe);
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[N].1 {
            let x = along(-0.5);
            (x, eval(&x))
        } else {
            let x = along(0.5);
            (x, eval(&x))
        };
        if fc < fr.min(simplex[N].1) {
            simplex[N] = (xc, fc);
            continue;
        }
        let best = simplex[0].0;
        for (x, v) in simplex.iter_mut().skip(1) {
            for j in 0..N {
                x[j] = best[j] + 0.5 * (x[j] - best[j]);
            }
            *v = eval(x);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Minimum {
        x: simplex[0].0,
        value: simplex[0].1,
        iterations,
        converged,
    }
}

fn is_converged<const N: usize>(simplex: &[([f64; N], f64)], tol: f64) -> bool {
    let (best, fbest) = simplex[0];
    simplex[1..].iter().all(|(x, v)| {
        (v - fbest).abs() <= tol && x.iter().zip(best.iter()).all(|(a, b)| (a - b).abs() <= tol)
    })
}
