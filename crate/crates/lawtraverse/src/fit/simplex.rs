//! Minimal deterministic Nelder-Mead for the handful of 3/4-dimensional
//! problems the fitter solves. Reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5; stops when the simplex's function-value spread drops below a
//! tolerance or an iteration cap is hit. No randomness anywhere, so repeated
//! runs on the same objective are bit-identical.

pub(crate) struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`, with an axis-aligned initial simplex of
/// edge length `step` per coordinate.
pub(crate) fn nelder_mead<F>(
    f: F,
    x0: &[f64],
    step: f64,
    tolerance: f64,
    max_iterations: usize,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    debug_assert!(n >= 1);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        // sort_by on the cached values keeps ordering deterministic; NaN from
        // the objective is mapped to +inf by callers, so partial_cmp is total
        simplex.sort_by(|p, q| p.1.partial_cmp(&q.1).expect("objective returned NaN"));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (ci, xi) in centroid.iter_mut().zip(x) {
                *ci += xi;
            }
        }
        for ci in &mut centroid {
            *ci /= n as f64;
        }

        let worst = simplex[n].clone();
        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + (c - w))
            .collect();
        let fr = f(&reflected);

        if fr < simplex[0].1 {
            // best so far: try stretching further in the same direction
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + 2.0 * (r - c))
                .collect();
            let fe = f(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }

        // reflection did not beat the second-worst point: contract
        let contracted: Vec<f64> = if fr < worst.1 {
            centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + 0.5 * (r - c))
                .collect()
        } else {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect()
        };
        let fc = f(&contracted);
        if fc < fr.min(worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }

        // contraction failed too: shrink everything toward the best vertex
        let best = simplex[0].0.clone();
        for entry in &mut simplex[1..] {
            for (xi, bi) in entry.0.iter_mut().zip(&best) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            entry.1 = f(&entry.0);
        }
    }

    simplex.sort_by(|p, q| p.1.partial_cmp(&q.1).expect("objective returned NaN"));
    SimplexResult {
        point: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
        converged,
    }
}
