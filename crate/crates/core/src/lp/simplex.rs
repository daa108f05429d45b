//! Dense two-phase tableau simplex with Bland's rule.

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::lp::LinearProgram;
use crate::scalar::Real;

pub const PIVOT_TOL: f64 = 1e-10;
pub const DEFAULT_ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub primal: Vec<T>,
    /// Shadow prices of the equality rows.
    pub eq_duals: Vec<T>,
    /// Loss of objective per unit increase of each `≥` right-hand side; nonnegative.
    pub ge_duals: Vec<T>,
    pub objective: T,
    pub iterations: usize,
}

impl<T: Real> LpSolution<T> {
    fn failed(status: LpStatus, lp: &LinearProgram<T>, iterations: usize) -> Self {
        Self {
            status,
            primal: Vec::new(),
            eq_duals: vec![T::zero(); lp.eq_rows.len()],
            ge_duals: vec![T::zero(); lp.ge_rows.len()],
            objective: if status == LpStatus::Unbounded { T::infinity() } else { T::neg_infinity() },
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Dual objective `bᵀy - hᵀw + lᵀ(c - Aᵀy + Gᵀw)`.
    pub fn dual_objective(&self, lp: &LinearProgram<T>) -> T {
        let mut obj = T::zero();
        let mut reduced = lp.objective.clone();
        for ((row, &b), &y) in lp.eq_rows.iter().zip(&lp.eq_rhs).zip(&self.eq_duals) {
            obj += b * y;
            reduced.iter_mut().zip(row).for_each(|(c, &a)| *c -= a * y);
        }
        for ((row, &h), &w) in lp.ge_rows.iter().zip(&lp.ge_rhs).zip(&self.ge_duals) {
            obj -= h * w;
            reduced.iter_mut().zip(row).for_each(|(c, &g)| *c += g * w);
        }
        obj + reduced.iter().zip(&lp.lower).map(|(&c, &l)| c * l).sum::<T>()
    }

    /// Largest violation of any constraint or bound by the primal point.
    pub fn primal_residual(&self, lp: &LinearProgram<T>) -> T {
        let dot = |r: &[T]| r.iter().zip(&self.primal).map(|(&a, &x)| a * x).sum::<T>();
        let mut worst = T::zero();
        for (r, &b) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
            worst = worst.max((dot(r) - b).abs());
        }
        for (r, &h) in lp.ge_rows.iter().zip(&lp.ge_rhs) {
            worst = worst.max(h - dot(r));
        }
        for (&x, &l) in self.primal.iter().zip(&lp.lower) {
            worst = worst.max(l - x);
        }
        worst
    }

    /// Largest complementary-slackness product over rows and variables.
    pub fn complementarity_residual(&self, lp: &LinearProgram<T>) -> T {
        let dot = |r: &[T]| r.iter().zip(&self.primal).map(|(&a, &x)| a * x).sum::<T>();
        let mut worst = T::zero();
        for ((r, &h), &w) in lp.ge_rows.iter().zip(&lp.ge_rhs).zip(&self.ge_duals) {
            worst = worst.max((w * (dot(r) - h)).abs());
        }
        for j in 0..lp.num_vars() {
            let mut rc = lp.objective[j];
            for (r, &y) in lp.eq_rows.iter().zip(&self.eq_duals) {
                rc -= r[j] * y;
            }
            for (r, &w) in lp.ge_rows.iter().zip(&self.ge_duals) {
                rc += r[j] * w;
            }
            worst = worst.max((rc * (self.primal[j] - lp.lower[j])).abs());
        }
        worst
    }
}

struct Tableau<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    basis: Vec<usize>,
    tol: T,
}

impl<T: Real> Tableau<T> {
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> T {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [T]) {
        let w = self.cols + 1;
        let p = self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != T::zero() {
                for j in 0..w {
                    let v = self.data[r * w + j];
                    self.data[i * w + j] -= f * v;
                }
            }
        }
        let f = cost[c];
        if f != T::zero() {
            for j in 0..w {
                cost[j] -= f * self.data[r * w + j];
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes with reduced costs in `cost`; only columns `< allowed` may enter.
    fn run(&mut self, cost: &mut [T], allowed: usize, iterations: &mut usize, cap: usize) -> Result<bool> {
        loop {
            let Some(c) = (0..allowed).find(|&j| cost[j] > self.tol) else { return Ok(true) };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > self.tol {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => ratio < best || (ratio == best && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return Ok(false) };
            *iterations += 1;
            if *iterations > cap {
                return Err(Error::IterationCap(cap));
            }
            self.pivot(r, c, cost);
        }
    }

    fn drop_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

pub fn solve_lp<T: Real>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    solve_lp_with_cap(lp, DEFAULT_ITERATION_CAP)
}

pub fn solve_lp_with_cap<T: Real>(lp: &LinearProgram<T>, cap: usize) -> Result<LpSolution<T>> {
    lp.validate()?;
    let n = lp.num_vars();
    let (me, mg) = (lp.eq_rows.len(), lp.ge_rows.len());
    let m = me + mg;
    let structural = n + mg;
    let cols = structural + m;
    // standard form over shifted variables x - l, surplus columns for ≥ rows
    let mut std_rows: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut std_rhs = Vec::with_capacity(m);
    let mut sign = Vec::with_capacity(m);
    for (k, (row, &b)) in lp.eq_rows.iter().chain(&lp.ge_rows).zip(lp.eq_rhs.iter().chain(&lp.ge_rhs)).enumerate() {
        let mut r = vec![T::zero(); structural];
        r[..n].copy_from_slice(row);
        if k >= me {
            r[n + k - me] = -T::one();
        }
        let shifted = b - row.iter().zip(&lp.lower).map(|(&a, &l)| a * l).sum::<T>();
        let s = if shifted < T::zero() { -T::one() } else { T::one() };
        r.iter_mut().for_each(|x| *x *= s);
        std_rows.push(r);
        std_rhs.push(shifted * s);
        sign.push(s);
    }
    let w = cols + 1;
    let mut data = vec![T::zero(); m * w];
    for i in 0..m {
        data[i * w..i * w + structural].copy_from_slice(&std_rows[i]);
        data[i * w + structural + i] = T::one();
        data[i * w + cols] = std_rhs[i];
    }
    let tol = T::tol(PIVOT_TOL);
    let mut tab = Tableau { rows: m, cols, data, basis: (structural..cols).collect(), tol };
    let mut iterations = 0;
    let mut row_ids: Vec<usize> = (0..m).collect();

    // phase 1: maximize minus the sum of artificials
    let mut cost = vec![T::zero(); w];
    for i in 0..m {
        for j in 0..w {
            if j < structural || j == cols {
                cost[j] += tab.at(i, j);
            }
        }
    }
    tab.run(&mut cost, structural, &mut iterations, cap)?;
    let infeas_tol = tol * (T::one() + std_rhs.iter().fold(T::zero(), |a, &b| a.max(b.abs())));
    if cost[cols] > infeas_tol {
        return Ok(LpSolution::failed(LpStatus::Infeasible, lp, iterations));
    }
    let mut i = 0;
    while i < tab.rows {
        if tab.basis[i] >= structural {
            match (0..structural).find(|&j| tab.at(i, j).abs() > tol) {
                Some(c) => {
                    tab.pivot(i, c, &mut cost);
                    i += 1;
                }
                None => {
                    tab.drop_row(i);
                    row_ids.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // phase 2
    let mut cost = vec![T::zero(); w];
    cost[..n].copy_from_slice(&lp.objective);
    for i in 0..tab.rows {
        let f = cost[tab.basis[i]];
        if f != T::zero() {
            for j in 0..w {
                cost[j] -= f * tab.at(i, j);
            }
        }
    }
    if !tab.run(&mut cost, structural, &mut iterations, cap)? {
        return Ok(LpSolution::failed(LpStatus::Unbounded, lp, iterations));
    }

    // refine the basic solution and duals from the original data
    let k = tab.rows;
    let mut bmat = vec![T::zero(); k * k];
    for (r, &orig) in row_ids.iter().enumerate() {
        for (c, &j) in tab.basis.iter().enumerate() {
            bmat[r * k + c] = std_rows[orig][j];
        }
    }
    let rhs: Vec<T> = row_ids.iter().map(|&r| std_rhs[r]).collect();
    let c_b: Vec<T> = tab.basis.iter().map(|&j| if j < n { lp.objective[j] } else { T::zero() }).collect();
    let (xb, y) = match Lu::factor(&bmat, k) {
        Ok(lu) => (lu.solve(&rhs)?, lu.solve_transpose(&c_b)?),
        Err(_) => ((0..k).map(|i| tab.rhs(i)).collect(), vec![T::zero(); k]),
    };
    let mut shifted = vec![T::zero(); structural];
    for (i, &j) in tab.basis.iter().enumerate() {
        shifted[j] = xb[i].max(T::zero());
    }
    let primal: Vec<T> = (0..n).map(|j| shifted[j] + lp.lower[j]).collect();
    let mut duals = vec![T::zero(); m];
    for (r, &orig) in row_ids.iter().enumerate() {
        duals[orig] = y[r] * sign[orig];
    }
    let eq_duals = duals[..me].to_vec();
    let ge_duals = duals[me..].iter().map(|&z| (-z).max(T::zero())).collect();
    let objective = primal.iter().zip(&lp.objective).map(|(&x, &c)| x * c).sum();
    Ok(LpSolution { status: LpStatus::Optimal, primal, eq_duals, ge_duals, objective, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_by_one() {
        let mut lp = LinearProgram::<f64>::new(vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        let s = solve_lp(&lp).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!((s.ge_duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds() {
        let mut lp = LinearProgram::<f64>::new(vec![1.0]);
        lp.add_ge(vec![1.0], 2.0).add_le(vec![1.0], 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::<f64>::new(vec![1.0, 1.0]);
        lp.add_ge(vec![1.0, -1.0], 0.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn lower_bounds_and_redundant_rows() {
        let mut lp = LinearProgram::<f64>::new(vec![-1.0, -2.0]);
        lp.add_eq(vec![1.0, 1.0], 3.0).add_eq(vec![2.0, 2.0], 6.0);
        lp.lower = vec![0.5, 1.0];
        let s = solve_lp(&lp).unwrap();
        assert!((s.objective + 4.0).abs() < 1e-12);
        assert!((s.dual_objective(&lp) - s.objective).abs() < 1e-12);
    }

    #[test]
    fn dump_round_trip() {
        let mut lp = LinearProgram::<f64>::new(vec![1.0, 0.5]);
        lp.add_eq(vec![1.0, 1.0], 1.0).add_ge(vec![0.0, 1.0], 0.25);
        lp.lower = vec![0.0, -1.0];
        assert_eq!(LinearProgram::parse(&lp.dump()).unwrap(), lp);
    }
}
