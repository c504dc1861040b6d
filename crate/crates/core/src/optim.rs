//! Derivative-free Nelder-Mead simplex minimiser.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Relative spread of objective values across the simplex at convergence.
    pub ftol: f64,
    /// Maximum coordinate distance from the best vertex at convergence.
    pub xtol: f64,
    /// Offset of the initial vertices from the starting point.
    pub step: f64,
    pub max_restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iter: 5000, ftol: 1e-10, xtol: 1e-7, step: 0.1, max_restarts: 6 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

impl NelderMead {
    /// One simplex run from `x0`.
    pub fn run<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64]) -> Minimum {
        let dim = x0.len();
        if dim == 0 {
            return Minimum { x: vec![], value: sanitize(f(&[])), iterations: 0, converged: true };
        }
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for i in 0..dim {
            let mut v = x0.to_vec();
            v[i] += self.step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();

        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let best = values[0];
            let worst = values[dim];
            let spread_f = worst - best;
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0_f64, f64::max);
            if best.is_finite() && spread_f <= self.ftol * (1.0 + best.abs()) && spread_x <= self.xtol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for v in &simplex[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + t * (w - c)).collect()
            };

            let reflected = along(-alpha);
            let f_r = sanitize(f(&reflected));
            if f_r < values[0] {
                let expanded = along(-gamma);
                let f_e = sanitize(f(&expanded));
                if f_e < f_r {
                    simplex[dim] = expanded;
                    values[dim] = f_e;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = f_r;
                }
                continue;
            }
            if f_r < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = f_r;
                continue;
            }
            let (contracted, f_c) = if f_r < values[dim] {
                let c = along(-rho);
                let fc = sanitize(f(&c));
                (c, fc)
            } else {
                let c = along(rho);
                let fc = sanitize(f(&c));
                (c, fc)
            };
            if f_c < values[dim].min(f_r) {
                simplex[dim] = contracted;
                values[dim] = f_c;
                continue;
            }
            // shrink towards the best vertex
            let best_v = simplex[0].clone();
            for i in 1..=dim {
                for (x, b) in simplex[i].iter_mut().zip(&best_v) {
                    *x = b + sigma * (*x - b);
                }
                values[i] = sanitize(f(&simplex[i]));
            }
        }
        let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        Minimum { x: simplex[best].clone(), value: values[best], iterations, converged }
    }

    /// Runs from `x0`, then restarts with a fresh simplex around the incumbent
    /// until a restart no longer improves it.
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Result<Minimum> {
        let mut best = self.run(&f, x0);
        for restart in 0..self.max_restarts {
            let next = self.run(&f, &best.x);
            let threshold = self.ftol * (1.0 + best.value.abs());
            let improved = best.value - next.value > threshold;
            let iterations = best.iterations + next.iterations;
            if next.value < best.value || (next.converged && !improved) {
                best = Minimum { iterations, ..next };
            }
            if !improved && best.converged && best.value.is_finite() {
                return Ok(best);
            }
            if restart + 1 == self.max_restarts {
                break;
            }
        }
        Err(Error::NonConvergence { restarts: self.max_restarts })
    }
}
