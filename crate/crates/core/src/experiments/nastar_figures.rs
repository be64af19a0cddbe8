use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{logspace, Cell, Table};

use crate::bounds::{g, na_star_asymptotic_quiet, solve_na_star, AsymptoticVariant};
use crate::error::{Error, Result};

/// Grid for the optimal-split comparisons: one smaller party of `n_a` modes
/// against each `n_b`, over `ν = N/n_A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaStarFigureSpec {
    pub n_a: usize,
    pub n_bs: Vec<usize>,
    pub nus: Vec<f64>,
}

impl Default for NaStarFigureSpec {
    fn default() -> Self {
        Self {
            n_a: 3,
            n_bs: vec![3, 6, 9],
            nus: logspace(1.0, 100.0, 40),
        }
    }
}

impl NaStarFigureSpec {
    fn points(&self) -> Result<Vec<(usize, f64)>> {
        if self.n_a == 0 || self.n_bs.iter().any(|&b| b < self.n_a) {
            return Err(Error::param("n_bs", "every n_B must be >= n_A >= 1"));
        }
        if self.nus.iter().any(|nu| !(*nu > 0.0) || !nu.is_finite()) {
            return Err(Error::param("nus", "nu values must be finite and positive"));
        }
        Ok(self
            .n_bs
            .iter()
            .flat_map(|&b| self.nus.iter().map(move |&nu| (b, nu)))
            .collect())
    }
}

/// Per-mode entanglement bound `F(N)/n_A` against `ν`, from bisection, the
/// leading asymptotic split, and the pure-Gaussian bound.
pub fn run_fig1_left(spec: &NaStarFigureSpec) -> Result<Table> {
    let mut table = Table::new(&[
        "n_a",
        "n_b",
        "mu",
        "nu",
        "f_bisection_per_mode [nats]",
        "f_asymptotic_per_mode [nats]",
        "gaussian_per_mode [nats]",
    ]);
    let n_a = spec.n_a;
    let rows: Vec<Result<Vec<Cell>>> = spec
        .points()?
        .par_iter()
        .map(|&(n_b, nu)| {
            let total = nu * n_a as f64;
            let exact = solve_na_star(total, n_a, n_b)?;
            let approx = na_star_asymptotic_quiet(total, n_a, n_b, AsymptoticVariant::Leading)?;
            Ok(vec![
                n_a.into(),
                n_b.into(),
                (n_a as f64 / n_b as f64).into(),
                nu.into(),
                g(exact.nu_star())?.into(),
                g(approx.nu_star())?.into(),
                g(nu / 2.0)?.into(),
            ])
        })
        .collect();
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

/// `ν* = N_A*/n_A` from each solver, with the bisection residual and the
/// relative errors of the closed forms.
pub fn run_fig2(spec: &NaStarFigureSpec) -> Result<Table> {
    let mut table = Table::new(&[
        "n_a",
        "n_b",
        "mu",
        "nu",
        "nu_star_bisection",
        "nu_star_asymptotic",
        "nu_star_asymptotic_refined",
        "residual_bisection",
        "rel_err_asymptotic",
        "rel_err_asymptotic_refined",
    ]);
    let n_a = spec.n_a;
    let rows: Vec<Result<Vec<Cell>>> = spec
        .points()?
        .par_iter()
        .map(|&(n_b, nu)| {
            let total = nu * n_a as f64;
            let exact = solve_na_star(total, n_a, n_b)?;
            let lead = na_star_asymptotic_quiet(total, n_a, n_b, AsymptoticVariant::Leading)?;
            let refined = na_star_asymptotic_quiet(total, n_a, n_b, AsymptoticVariant::Refined)?;
            let rel = |x: f64| (x - exact.n_a_star).abs() / exact.n_a_star;
            Ok(vec![
                n_a.into(),
                n_b.into(),
                (n_a as f64 / n_b as f64).into(),
                nu.into(),
                exact.nu_star().into(),
                lead.nu_star().into(),
                refined.nu_star().into(),
                exact.residual.into(),
                rel(lead.n_a_star).into(),
                rel(refined.n_a_star).into(),
            ])
        })
        .collect();
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_rows_coincide() {
        let spec = NaStarFigureSpec {
            n_a: 3,
            n_bs: vec![3],
            nus: vec![2.0, 50.0],
        };
        let t = run_fig1_left(&spec).unwrap();
        for row in &t.rows {
            let v: Vec<f64> = row[4..].iter().map(|c| c.as_f64().unwrap()).collect();
            assert!((v[0] - v[1]).abs() < 1e-14 && (v[0] - v[2]).abs() < 1e-14);
        }
        let t = run_fig2(&spec).unwrap();
        let nus = t.column_f64("nu").unwrap();
        let star = t.column_f64("nu_star_bisection").unwrap();
        for (nu, s) in nus.iter().zip(star) {
            assert!((s - nu / 2.0).abs() <= 1e-15 * nu);
        }
    }

    #[test]
    fn invalid_grid() {
        let spec = NaStarFigureSpec {
            n_a: 3,
            n_bs: vec![2],
            nus: vec![1.0],
        };
        assert!(run_fig2(&spec).is_err());
    }
}
