//! Dense two-phase simplex with Bland's rule, for the small LPs of angle
//! structures.

/// Entries below this magnitude count as zero in pivot selection.
const PIVOT_TOL: f64 = 1e-11;
/// Phase-one optimum above this means the constraints are inconsistent.
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Maximize `objective · x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64, pivots: usize },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                line[col] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Reduced costs of `cost` (maximization) for the current basis.
    fn reduced(&self, cost: &[f64], allowed: &[bool]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| {
                if !allowed[j] {
                    return 0.0;
                }
                let basic: f64 = self.basis.iter().enumerate().map(|(r, &b)| cost[b] * self.t[r][j]).sum();
                cost[j] - basic
            })
            .collect()
    }

    /// Runs simplex iterations; `false` means unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            let reduced = self.reduced(cost, allowed);
            let Some(col) = (0..self.cols).find(|&j| allowed[j] && reduced[j] > PIVOT_TOL) else {
                return true;
            };
            let rhs = self.cols;
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.t[r][rhs] / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - PIVOT_TOL
                                || (ratio <= bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(row, col);
        }
    }

    fn value(&self, cost: &[f64]) -> f64 {
        self.basis.iter().enumerate().map(|(r, &b)| cost[b] * self.t[r][self.cols]).sum()
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.objective.len();
    let m = lp.constraints.len();
    // Normalize to non-negative right-hand sides.
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            assert_eq!(c.coefficients.len(), n, "constraint width must match the objective");
            if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coefficients.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coefficients.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificial_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_artificial = n + slack_count;
    let cols = first_artificial + artificial_count;

    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut slack, mut artificial) = (n, first_artificial);
    for (r, (coef, rel, rhs)) in rows.iter().enumerate() {
        t[r][..n].copy_from_slice(coef);
        t[r][cols] = *rhs;
        match rel {
            Relation::Le => {
                t[r][slack] = 1.0;
                basis[r] = slack;
                slack += 1;
            }
            Relation::Ge => {
                t[r][slack] = -1.0;
                slack += 1;
                t[r][artificial] = 1.0;
                basis[r] = artificial;
                artificial += 1;
            }
            Relation::Eq => {
                t[r][artificial] = 1.0;
                basis[r] = artificial;
                artificial += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, cols, pivots: 0 };

    if artificial_count > 0 {
        let phase_one: Vec<f64> = (0..cols).map(|j| if j >= first_artificial { -1.0 } else { 0.0 }).collect();
        tab.optimize(&phase_one, &vec![true; cols]);
        if -tab.value(&phase_one) > FEASIBILITY_TOL {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-valued) artificials out of the basis; rows
        // where that is impossible are redundant and dropped.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= first_artificial {
                match (0..first_artificial).find(|&j| tab.t[r][j].abs() > PIVOT_TOL) {
                    Some(col) => tab.pivot(r, col),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let allowed: Vec<bool> = (0..cols).map(|j| j < first_artificial).collect();
    let cost: Vec<f64> = (0..cols).map(|j| if j < n { lp.objective[j] } else { 0.0 }).collect();
    if !tab.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[r][cols];
        }
    }
    LpOutcome::Optimal { value: tab.value(&cost), x, pivots: tab.pivots }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(coefficients: &[f64], relation: Relation, rhs: f64) -> Constraint {
        Constraint { coefficients: coefficients.to_vec(), relation, rhs }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 → (2, 6), value 36.
        let lp = LinearProgram {
            objective: vec![3.0, 5.0],
            constraints: vec![
                c(&[1.0, 0.0], Relation::Le, 4.0),
                c(&[0.0, 2.0], Relation::Le, 12.0),
                c(&[3.0, 2.0], Relation::Le, 18.0),
            ],
        };
        let LpOutcome::Optimal { x, value, .. } = solve(&lp) else { panic!() };
        assert!((value - 36.0).abs() < 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max -x - y, x + y = 3, x >= 1, y >= 1 → value -3.
        let lp = LinearProgram {
            objective: vec![-1.0, -1.0],
            constraints: vec![
                c(&[1.0, 1.0], Relation::Eq, 3.0),
                c(&[1.0, 0.0], Relation::Ge, 1.0),
                c(&[0.0, 1.0], Relation::Ge, 1.0),
            ],
        };
        let LpOutcome::Optimal { value, .. } = solve(&lp) else { panic!() };
        assert!((value + 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            objective: vec![1.0],
            constraints: vec![c(&[1.0], Relation::Le, 1.0), c(&[1.0], Relation::Ge, 2.0)],
        };
        assert_eq!(solve(&infeasible), LpOutcome::Infeasible);
        let unbounded = LinearProgram { objective: vec![1.0, 0.0], constraints: vec![c(&[0.0, 1.0], Relation::Le, 1.0)] };
        assert_eq!(solve(&unbounded), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            constraints: vec![
                c(&[1.0, 1.0], Relation::Eq, 2.0),
                c(&[2.0, 2.0], Relation::Eq, 4.0),
                c(&[0.0, 1.0], Relation::Le, 1.5),
            ],
        };
        let LpOutcome::Optimal { x, value, .. } = solve(&lp) else { panic!() };
        assert!((value - 3.5).abs() < 1e-12, "{x:?}");
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // max x, -x >= -5 → x = 5.
        let lp = LinearProgram { objective: vec![1.0], constraints: vec![c(&[-1.0], Relation::Ge, -5.0)] };
        let LpOutcome::Optimal { value, .. } = solve(&lp) else { panic!() };
        assert!((value - 5.0).abs() < 1e-12);
    }
}
