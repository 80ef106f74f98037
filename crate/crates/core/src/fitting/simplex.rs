//! Nelder-Mead simplex minimizer.

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Converged once `(f_worst - f_best) <= rel_tolerance * |f_best|`.
    pub rel_tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 2000,
            rel_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `start` with per-coordinate initial steps.
///
/// After convergence the simplex is rebuilt around the best vertex and the
/// search resumes while iterations remain, stopping once a restart no longer
/// improves the objective. The iteration budget is shared across restarts.
pub fn minimize<F>(mut f: F, start: &[f64], steps: &[f64], opts: SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best_point = start.to_vec();
    let mut best_value = f(start);
    let mut used = 0;
    let mut converged = false;
    while used < opts.max_iterations {
        let run = nelder_mead(&mut f, &best_point, steps, opts.max_iterations - used, opts.rel_tolerance);
        used += run.iterations.max(1);
        let improved = run.value < best_value
            && (best_value - run.value) > opts.rel_tolerance * best_value.abs();
        if run.value <= best_value {
            best_point = run.point;
            best_value = run.value;
        }
        converged = run.converged;
        if !run.converged || !improved {
            break;
        }
    }
    SimplexResult {
        point: best_point,
        value: best_value,
        iterations: used,
        converged,
    }
}

fn nelder_mead<F>(f: &mut F, start: &[f64], steps: &[f64], max_iter: usize, tol: f64) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let n = start.len();
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += steps[i];
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| sanitize(f(v))).collect();

    let mut iter = 0;
    let mut converged = false;
    while iter < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if vals[n] - vals[0] <= tol * vals[0].abs() {
            converged = true;
            break;
        }
        iter += 1;

        let mut centroid = vec![0.0; n];
        for v in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&verts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(ALPHA);
        let fr = sanitize(f(&xr));
        if fr < vals[0] {
            let xe = along(GAMMA);
            let fe = sanitize(f(&xe));
            if fe < fr {
                verts[n] = xe;
                vals[n] = fe;
            } else {
                verts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            verts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(RHO);
            let fc = sanitize(f(&xc));
            (xc, fc)
        } else {
            let xc = along(-RHO);
            let fc = sanitize(f(&xc));
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            verts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        let best = verts[0].clone();
        for i in 1..=n {
            for (x, b) in verts[i].iter_mut().zip(&best) {
                *x = b + SIGMA * (*x - b);
            }
            vals[i] = sanitize(f(&verts[i]));
        }
    }

    let bi = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexResult {
        point: verts[bi].clone(),
        value: vals[bi],
        iterations: iter,
        converged,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
