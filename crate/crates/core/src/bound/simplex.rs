//! Derivative-free simplex descent with adaptive coefficients.
//!
//! Coefficients follow the dimension-dependent choice of Gao and Han, which
//! keeps the method from stalling in the 8- and 16-dimensional charts used for
//! three-qubit states. Every trial point is passed through `project` before
//! it is evaluated or stored, so the simplex stays on the constraint manifold
//! of the chart (the unit sphere here).

#[derive(Clone, Debug)]
pub(crate) struct SimplexOptions {
    pub initial_step: f64,
    pub f_tolerance: f64,
    pub x_tolerance: f64,
    pub max_iterations: usize,
    /// Fresh simplices built around the incumbent after convergence.
    pub polish_rounds: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn minimize<F, P>(f: F, project: P, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let mut x = x0.to_vec();
    project(&mut x);
    let mut total = 0;
    let mut step = opts.initial_step;
    let mut best = run(&f, &project, &x, step, opts, opts.max_iterations);
    total += best.iterations;
    for _ in 0..opts.polish_rounds {
        if total >= opts.max_iterations || !best.converged {
            break;
        }
        step = (step * 0.1).max(1e-4);
        let again = run(&f, &project, &best.x, step, opts, opts.max_iterations - total);
        total += again.iterations;
        let improved = again.value < best.value - opts.f_tolerance;
        if again.value <= best.value {
            best = SimplexOutcome { converged: again.converged, ..again };
        }
        if !improved {
            break;
        }
    }
    best.iterations = total;
    best
}

fn run<F, P>(f: &F, project: &P, x0: &[f64], step: f64, opts: &SimplexOptions, budget: usize) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i] >= 0.0 { step } else { -step };
        project(&mut p);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    let eval = |p: &mut Vec<f64>| {
        project(p);
        f(p)
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < budget {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let (lo, hi, second) = (order[0], order[n], order[n - 1]);

        let spread = vals[hi] - vals[lo];
        let diameter = pts
            .iter()
            .map(|p| p.iter().zip(&pts[lo]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tolerance && diameter <= opts.x_tolerance.max(opts.f_tolerance) {
            converged = true;
            break;
        }
        if spread <= opts.f_tolerance * 1e-3 && diameter <= 1e-3 {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&pts[i]) {
                *c += v / nf;
            }
        }

        for k in 0..n {
            trial[k] = centroid[k] + alpha * (centroid[k] - pts[hi][k]);
        }
        let fr = eval(&mut trial);

        if fr < vals[lo] {
            for k in 0..n {
                trial2[k] = centroid[k] + beta * (trial[k] - centroid[k]);
            }
            let fe = eval(&mut trial2);
            if fe < fr {
                pts[hi].copy_from_slice(&trial2);
                vals[hi] = fe;
            } else {
                pts[hi].copy_from_slice(&trial);
                vals[hi] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[hi].copy_from_slice(&trial);
            vals[hi] = fr;
            continue;
        }
        let outside = fr < vals[hi];
        for k in 0..n {
            trial2[k] = if outside {
                centroid[k] + gamma * (trial[k] - centroid[k])
            } else {
                centroid[k] - gamma * (centroid[k] - pts[hi][k])
            };
        }
        let fc = eval(&mut trial2);
        if fc < fr.min(vals[hi]) {
            pts[hi].copy_from_slice(&trial2);
            vals[hi] = fc;
            continue;
        }
        let best = pts[lo].clone();
        for i in 0..=n {
            if i == lo {
                continue;
            }
            for k in 0..n {
                pts[i][k] = best[k] + delta * (pts[i][k] - best[k]);
            }
            project(&mut pts[i]);
            vals[i] = f(&pts[i]);
        }
    }
    let lo = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)))
        .unwrap();
    SimplexOutcome {
        x: pts[lo].clone(),
        value: vals[lo],
        iterations,
        converged,
    }
}
