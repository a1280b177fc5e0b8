// SPDX-License-Identifier: Apache-2.0

//! Derivative-free simplex minimization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    /// Stop once `f(worst) - f(best)` over the simplex drops below this.
    pub ftol: f64,
    /// Together with `ftol`: every vertex within this distance (max norm)
    /// of the best one. Guards against flat spreads on symmetric slopes.
    pub xtol: f64,
    pub max_iterations: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            ftol: 1e-6,
            xtol: 1e-4,
            max_iterations: 20_000,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Best simplex value after each iteration.
    pub best_history: Vec<T>,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F> Counted<F> {
    fn eval<T: Real>(&mut self, x: &[T]) -> Result<T>
    where
        F: FnMut(&[T]) -> T,
    {
        self.evaluations += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::Optimizer(format!(
                "objective returned {v} at evaluation {} (point {:?})",
                self.evaluations,
                x.iter().map(|t| t.as_f64()).collect::<Vec<_>>()
            )));
        }
        Ok(v)
    }
}

fn lerp<T: Real>(from: &[T], to: &[T], t: T) -> Vec<T> {
    from.iter().zip(to).map(|(&a, &b)| a + t * (b - a)).collect()
}

fn diameter<T: Real>(simplex: &[(Vec<T>, T)]) -> T {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|v| v.0.iter().zip(best).map(|(&a, &b)| (a - b).abs()))
        .fold(T::zero(), T::max)
}

pub fn nelder_mead<T: Real, F>(objective: F, x0: &[T], options: &NelderMeadOptions) -> Result<NelderMeadResult<T>>
where
    F: FnMut(&[T]) -> T,
{
    let n = x0.len();
    if n == 0 {
        return Err(invalid("Nelder-Mead needs at least one parameter"));
    }
    let o = options;
    if !(o.reflect > 0.0 && o.expand > 1.0 && o.contract > 0.0 && o.contract < 1.0 && o.shrink > 0.0 && o.shrink < 1.0)
    {
        return Err(invalid("Nelder-Mead coefficients out of range"));
    }
    let (rho, chi, gamma, sigma) = (
        T::lit(o.reflect),
        T::lit(o.expand),
        T::lit(o.contract),
        T::lit(o.shrink),
    );
    let (ftol, xtol) = (T::lit(o.ftol), T::lit(o.xtol));
    let mut f = Counted {
        f: objective,
        evaluations: 0,
    };

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f.eval(x0)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = x[i] + T::lit(o.initial_step);
        let v = f.eval(&x)?;
        simplex.push((x, v));
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let termination = loop {
        // stable sort keeps earlier vertices first on ties
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if simplex[n].1 - simplex[0].1 < ftol && diameter(&simplex) <= xtol {
            break Termination::Converged;
        }
        if iterations >= o.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let inv = T::one() / T::lit(n as f64);
        let centroid: Vec<T> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v.0[k]).sum::<T>() * inv)
            .collect();
        let worst = simplex[n].0.clone();
        let (f_best, f_second, f_worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);

        let xr = lerp(&centroid, &worst, -rho);
        let fr = f.eval(&xr)?;
        let mut replacement = None;
        if fr < f_best {
            let xe = lerp(&centroid, &xr, chi);
            let fe = f.eval(&xe)?;
            replacement = Some(if fe < fr { (xe, fe) } else { (xr, fr) });
        } else if fr < f_second {
            replacement = Some((xr, fr));
        } else if fr < f_worst {
            let xc = lerp(&centroid, &xr, gamma);
            let fc = f.eval(&xc)?;
            if fc <= fr {
                replacement = Some((xc, fc));
            }
        } else {
            let xcc = lerp(&centroid, &worst, gamma);
            let fcc = f.eval(&xcc)?;
            if fcc < f_worst {
                replacement = Some((xcc, fcc));
            }
        }
        match replacement {
            Some(v) => simplex[n] = v,
            None => {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = lerp(&best, &v.0, sigma);
                    v.1 = f.eval(&v.0)?;
                }
            }
        }
        history.push(simplex.iter().map(|v| v.1).fold(T::infinity(), T::min));
    };
    let (x, value) = simplex.swap_remove(0);
    Ok(NelderMeadResult {
        x,
        value,
        iterations,
        evaluations: f.evaluations,
        termination,
        best_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_bowl() {
        let r = nelder_mead(
            |x: &[f64]| (x[0] - 2.0).powi(2),
            &[10.0],
            &NelderMeadOptions {
                ftol: 1e-14,
                xtol: 1e-7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-5, "{r:?}");
        assert_eq!(r.termination, Termination::Converged);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let opts = NelderMeadOptions {
            ftol: 1e-16,
            xtol: 1e-8,
            max_iterations: 100_000,
            initial_step: 0.1,
            ..Default::default()
        };
        let r = nelder_mead(f, &[-1.2, 1.0], &opts).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn best_value_never_increases() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum::<f64>() + x[0].sin();
        let r = nelder_mead(f, &[1.0, -2.0, 0.5], &NelderMeadOptions::default()).unwrap();
        assert!(r.best_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let r = nelder_mead(
            |x: &[f64]| if x[0] > 0.2 { f64::NAN } else { x[0] },
            &[0.0],
            &Default::default(),
        );
        assert!(matches!(r, Err(Error::Optimizer(_))));
        assert!(nelder_mead(|_: &[f64]| 0.0, &[], &Default::default()).is_err());
    }

    #[test]
    fn iteration_cap() {
        let opts = NelderMeadOptions {
            max_iterations: 3,
            ftol: 0.0,
            xtol: 0.0,
            ..Default::default()
        };
        let r = nelder_mead(|x: &[f64]| x[0] * x[0] + x[1] * x[1], &[3.0, 3.0], &opts).unwrap();
        assert_eq!(r.termination, Termination::MaxIterations);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn works_in_single_precision() {
        let r = nelder_mead(|x: &[f32]| (x[0] + 1.0).powi(2) + 3.0, &[4.0_f32], &Default::default()).unwrap();
        assert!((r.x[0] + 1.0).abs() < 2e-3);
    }
}
