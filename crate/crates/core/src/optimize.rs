//! Derivative-free minimization over qubit measurement directions: a uniform
//! `(θ, φ)` grid seeds a Nelder-Mead simplex.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRefineOptions {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Simplex diameter (radians) at which refinement stops.
    pub angle_tolerance: f64,
    /// Spread of simplex values at which refinement stops.
    pub value_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GridRefineOptions {
    fn default() -> Self {
        Self {
            grid_theta: 64,
            grid_phi: 64,
            angle_tolerance: 1e-9,
            value_tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereOptimum {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
    pub grid_theta: f64,
    pub grid_phi: f64,
    pub grid_value: f64,
    pub iterations: usize,
}

/// Minimizes `f(θ, φ)`. Grid points are `θ_i = iπ/n_θ`, `φ_j = 2πj/n_φ`; ties
/// go to the lexicographically lowest `(θ, φ)`. `extra_starts` are scored with
/// the grid (useful to guarantee a candidate such as a known eigenbasis).
pub fn minimize_on_sphere(
    f: impl Fn(f64, f64) -> f64,
    opts: &GridRefineOptions,
    extra_starts: &[(f64, f64)],
) -> SphereOptimum {
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..opts.grid_theta {
        let theta = PI * i as f64 / opts.grid_theta as f64;
        for j in 0..opts.grid_phi {
            let phi = 2.0 * PI * j as f64 / opts.grid_phi as f64;
            let v = f(theta, phi);
            if v < best.2 {
                best = (theta, phi, v);
            }
        }
    }
    for &(theta, phi) in extra_starts {
        let v = f(theta, phi);
        if v < best.2 {
            best = (theta, phi, v);
        }
    }
    let step = 0.5 * PI / opts.grid_theta as f64;
    let (x, fx, iterations) = nelder_mead_2d(|p| f(p[0], p[1]), [best.0, best.1], step, opts);
    let (theta, phi, value) = if fx < best.2 { (x[0], x[1], fx) } else { (best.0, best.1, best.2) };
    SphereOptimum {
        theta,
        phi,
        value,
        grid_theta: best.0,
        grid_phi: best.1,
        grid_value: best.2,
        iterations,
    }
}

/// Plain Nelder-Mead in two dimensions. Returns `(argmin, min, iterations)`.
pub fn nelder_mead_2d(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: f64,
    opts: &GridRefineOptions,
) -> ([f64; 2], f64, usize) {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(&f);
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        // order: best first
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.map(|k| simplex[k]);
        values = idx.map(|k| values[k]);

        let diameter = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .map(|(a, b)| dist(simplex[a], simplex[b]))
            .fold(0.0, f64::max);
        let spread = values[2] - values[0];
        if diameter < opts.angle_tolerance && spread <= opts.value_tolerance {
            break;
        }
        iterations += 1;

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let p = along(-0.5);
                (p, f(p))
            } else {
                let p = along(0.5);
                (p, f(p))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best], values[best], iterations)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
