//! Dense two-phase primal simplex over a full tableau with bounded variables.
//!
//! Every column (structural, slack, artificial) carries `[lo, hi]` bounds and
//! nonbasic columns sit at one of them, so branching on a binary only changes
//! bounds and never adds rows. Dantzig pricing is used until the number of
//! degenerate pivots exceeds `bland_factor * (rows + cols)`, after which
//! Bland's smallest-index rule takes over for good.

use std::time::Instant;

use crate::error::MilpError;
use crate::lp::{LpEngine, LpSolution, LpStatus};
use crate::model::{Model, Sense};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DenseSimplex {
    pub bland_factor: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self { bland_factor: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Place {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free column held at zero.
    Zero,
}

struct Tableau {
    m: usize,
    cols: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    place: Vec<Place>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Original (unscaled) constraint matrix including slacks, row-major.
    a: Vec<f64>,
    rhs: Vec<f64>,
    art_start: usize,
    art_sign: Vec<f64>,
    degenerate: usize,
    bland_after: usize,
    pivots: usize,
    max_pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(model: &Model, lower: &[f64], upper: &[f64], bland_factor: usize) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let slack_rows: Vec<usize> = (0..m)
            .filter(|&i| model.rows[i].sense != Sense::Eq)
            .collect();
        let ns = slack_rows.len();
        let art_start = n + ns;
        let cols = art_start + m;

        let mut lo = Vec::with_capacity(cols);
        let mut hi = Vec::with_capacity(cols);
        lo.extend_from_slice(lower);
        hi.extend_from_slice(upper);
        lo.extend(std::iter::repeat(0.0).take(ns + m));
        hi.extend(std::iter::repeat(f64::INFINITY).take(ns + m));

        let mut a = vec![0.0; m * art_start];
        let mut rhs = vec![0.0; m];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, c) in &row.terms {
                a[i * art_start + j] += c;
            }
            rhs[i] = row.rhs;
        }
        for (k, &i) in slack_rows.iter().enumerate() {
            a[i * art_start + n + k] = match model.rows[i].sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
                Sense::Eq => unreachable!(),
            };
        }

        let mut x = vec![0.0; cols];
        let mut place = vec![Place::Lower; cols];
        for j in 0..art_start {
            if lo[j].is_finite() {
                x[j] = lo[j];
                place[j] = Place::Lower;
            } else if hi[j].is_finite() {
                x[j] = hi[j];
                place[j] = Place::Upper;
            } else {
                x[j] = 0.0;
                place[j] = Place::Zero;
            }
        }

        let mut t = vec![0.0; m * cols];
        let mut art_sign = vec![1.0; m];
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            let resid = rhs[i]
                - (0..art_start)
                    .map(|j| a[i * art_start + j] * x[j])
                    .sum::<f64>();
            let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
            art_sign[i] = sign;
            for j in 0..art_start {
                t[i * cols + j] = sign * a[i * art_start + j];
            }
            t[i * cols + art_start + i] = 1.0;
            let art = art_start + i;
            basis.push(art);
            place[art] = Place::Basic(i);
            x[art] = resid.abs();
        }

        Tableau {
            m,
            cols,
            t,
            d: vec![0.0; cols],
            basis,
            place,
            x,
            lo,
            hi,
            a,
            rhs,
            art_start,
            art_sign,
            degenerate: 0,
            bland_after: bland_factor * (m + cols),
            pivots: 0,
            max_pivots: 200_000 + 100 * (m + cols),
        }
    }

    fn price(&mut self, cost: &[f64]) {
        for j in 0..self.cols {
            let mut dj = cost[j];
            for i in 0..self.m {
                let cb = cost[self.basis[i]];
                if cb != 0.0 {
                    dj -= cb * self.t[i * self.cols + j];
                }
            }
            self.d[j] = dj;
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn bland(&self) -> bool {
        self.degenerate > self.bland_after
    }

    fn entering(&self) -> Option<(usize, f64)> {
        let bland = self.bland();
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = match self.place[j] {
                Place::Basic(_) => continue,
                Place::Lower if dj < -OPT_TOL => 1.0,
                Place::Upper if dj > OPT_TOL => -1.0,
                Place::Zero if dj.abs() > OPT_TOL => -dj.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        for k in 0..cols {
            self.t[r * cols + k] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[j];
            if f != 0.0 {
                for (v, &pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pr;
                }
                row[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, &pr) in self.d.iter_mut().zip(pivot_row.iter()) {
                *v -= f * pr;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = j;
        self.place[j] = Place::Basic(r);
        let _ = leaving;
        self.pivots += 1;
    }

    fn run(&mut self, deadline: Option<Instant>) -> Result<Outcome, MilpError> {
        loop {
            if self.pivots >= self.max_pivots {
                return Err(MilpError::IterationLimit(self.pivots));
            }
            if self.pivots % 64 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        return Err(MilpError::Deadline);
                    }
                }
            }
            let Some((j, dir)) = self.entering() else {
                return Ok(Outcome::Optimal);
            };
            let bland = self.bland();
            let cols = self.cols;

            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0f64;
            for i in 0..self.m {
                let alpha = self.t[i * cols + j];
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha;
                let b = self.basis[i];
                let (limit, to_upper) = if rate < 0.0 {
                    if !self.lo[b].is_finite() {
                        continue;
                    }
                    ((self.x[b] - self.lo[b]).max(0.0) / -rate, false)
                } else {
                    if !self.hi[b].is_finite() {
                        continue;
                    }
                    ((self.hi[b] - self.x[b]).max(0.0) / rate, true)
                };
                let take = if limit < theta - TIE_TOL {
                    true
                } else if limit <= theta + TIE_TOL {
                    match leave {
                        None => false,
                        Some((r, _)) if bland => b < self.basis[r],
                        Some(_) => alpha.abs() > leave_alpha,
                    }
                } else {
                    false
                };
                if take {
                    theta = limit;
                    leave = Some((i, to_upper));
                    leave_alpha = alpha.abs();
                }
            }

            if !theta.is_finite() {
                return Ok(Outcome::Unbounded);
            }
            if theta <= TIE_TOL {
                self.degenerate += 1;
            }

            if theta > 0.0 {
                self.x[j] += dir * theta;
                for i in 0..self.m {
                    let alpha = self.t[i * cols + j];
                    if alpha != 0.0 {
                        self.x[self.basis[i]] -= dir * alpha * theta;
                    }
                }
            }

            match leave {
                None => {
                    self.place[j] = if dir > 0.0 { Place::Upper } else { Place::Lower };
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                    self.pivots += 1;
                }
                Some((r, to_upper)) => {
                    let b = self.basis[r];
                    if to_upper {
                        self.x[b] = self.hi[b];
                        self.place[b] = Place::Upper;
                    } else {
                        self.x[b] = self.lo[b];
                        self.place[b] = Place::Lower;
                    }
                    self.pivot(r, j);
                }
            }
        }
    }

    /// Recomputes basic values from `B^-1 (b - N x_N)`; `B^-1` is read off the
    /// artificial columns of the tableau.
    fn refresh_basics(&mut self) {
        let m = self.m;
        let width = self.art_start;
        let mut resid = self.rhs.clone();
        for j in 0..width {
            if matches!(self.place[j], Place::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            for (i, r) in resid.iter_mut().enumerate() {
                *r -= self.a[i * width + j] * self.x[j];
            }
        }
        for i in 0..m {
            let art = self.art_start + i;
            if !matches!(self.place[art], Place::Basic(_)) {
                // Nonbasic artificials sit at zero.
                self.x[art] = 0.0;
            }
        }
        for i in 0..m {
            let mut v = 0.0;
            for (k, r) in resid.iter().enumerate() {
                v += self.t[i * self.cols + self.art_start + k] * self.art_sign[k] * r;
            }
            self.x[self.basis[i]] = v;
        }
    }
}

impl DenseSimplex {
    pub fn solve_with_bounds(
        &self,
        model: &Model,
        lower: &[f64],
        upper: &[f64],
        deadline: Option<Instant>,
    ) -> Result<LpSolution, MilpError> {
        let n = model.num_vars();
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return Ok(LpSolution::infeasible(n));
        }
        let mut tab = Tableau::build(model, lower, upper, self.bland_factor);

        // Phase 1: minimize the sum of artificials.
        let mut cost1 = vec![0.0; tab.cols];
        for c in cost1.iter_mut().skip(tab.art_start) {
            *c = 1.0;
        }
        tab.price(&cost1);
        match tab.run(deadline)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => unreachable!("phase 1 objective is bounded below"),
        }
        tab.refresh_basics();
        let infeas: f64 = (tab.art_start..tab.cols).map(|j| tab.x[j].abs()).sum();
        if infeas > FEAS_TOL {
            return Ok(LpSolution {
                pivots: tab.pivots,
                ..LpSolution::infeasible(n)
            });
        }

        // Lock artificials at zero and drive basic ones out where possible.
        for j in tab.art_start..tab.cols {
            tab.hi[j] = 0.0;
            if !matches!(tab.place[j], Place::Basic(_)) {
                tab.place[j] = Place::Lower;
                tab.x[j] = 0.0;
            }
        }
        for r in 0..tab.m {
            if tab.basis[r] < tab.art_start {
                continue;
            }
            let cols = tab.cols;
            let candidate = (0..tab.art_start)
                .filter(|&j| !matches!(tab.place[j], Place::Basic(_)))
                .max_by(|&a, &b| {
                    tab.t[r * cols + a]
                        .abs()
                        .total_cmp(&tab.t[r * cols + b].abs())
                        .then(b.cmp(&a))
                });
            if let Some(j) = candidate {
                if tab.t[r * cols + j].abs() > 1e-7 {
                    let art = tab.basis[r];
                    tab.pivot(r, j);
                    tab.place[art] = Place::Lower;
                    tab.x[art] = 0.0;
                }
            }
        }
        tab.refresh_basics();

        // Phase 2.
        let mut cost2 = vec![0.0; tab.cols];
        for (j, v) in model.vars.iter().enumerate() {
            cost2[j] = v.objective;
        }
        tab.price(&cost2);
        let outcome = tab.run(deadline)?;
        tab.refresh_basics();
        if let Outcome::Unbounded = outcome {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective: f64::NEG_INFINITY,
                values: tab.x[..n].to_vec(),
                pivots: tab.pivots,
            });
        }

        let mut values = tab.x[..n].to_vec();
        for (j, v) in values.iter_mut().enumerate() {
            if *v < lower[j] && *v > lower[j] - 1e-9 {
                *v = lower[j];
            }
            if *v > upper[j] && *v < upper[j] + 1e-9 {
                *v = upper[j];
            }
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: model.objective_value(&values),
            values,
            pivots: tab.pivots,
        })
    }

    /// Pivot count after which Bland's rule engages, for a model of this shape.
    pub fn bland_threshold(&self, model: &Model) -> usize {
        let m = model.num_rows();
        let ns = model.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        self.bland_factor * (m + model.num_vars() + ns + m)
    }
}

impl LpEngine for DenseSimplex {
    fn solve_bounded(
        &self,
        model: &Model,
        lower: &[f64],
        upper: &[f64],
        deadline: Option<Instant>,
    ) -> Result<LpSolution, MilpError> {
        self.solve_with_bounds(model, lower, upper, deadline)
    }
}
