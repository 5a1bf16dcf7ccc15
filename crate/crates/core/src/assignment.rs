//! Maximum-score bipartite assignment over sparse score matrices.
//!
//! Three solvers share one objective: choose a set of (row, col) pairs, each
//! row and column used at most once, only over present entries, maximizing
//! the summed score. Nodes may stay unmatched, so a negative entry is never
//! worth taking for the exact solvers.
//!
//! [`hungarian_max`] and [`brute_force_max`] also share the tie-break: among
//! matchings with equal total (within [`ScoreMatrix::tolerance`]) the
//! lexicographically smallest sorted pair list wins.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Dense storage of an optionally-present score per (row, col). A missing
/// entry forbids the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Option<f64>>,
}

impl ScoreMatrix {
    /// All entries forbidden.
    pub fn new(rows: usize, cols: usize) -> Self {
        ScoreMatrix {
            rows,
            cols,
            entries: vec![None; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = ScoreMatrix::new(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::contract("score matrix rows have unequal length"));
            }
            for (c, &v) in row.iter().enumerate() {
                if let Some(s) = v {
                    m.set(r, c, s)?;
                }
            }
        }
        Ok(m)
    }

    /// Fully-present matrix from plain scores.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let opt: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| r.iter().copied().map(Some).collect())
            .collect();
        ScoreMatrix::from_rows(&opt)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::contract(format!(
                "score at ({row}, {col}) is not finite"
            )));
        }
        self.entries[row * self.cols + col] = Some(score);
        Ok(())
    }

    pub fn forbid(&mut self, row: usize, col: usize) {
        self.entries[row * self.cols + col] = None;
    }

    fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0f64, |m, s| m.max(s.abs()))
    }

    /// Absolute tolerance under which two matching totals count as tied.
    pub fn tolerance(&self) -> f64 {
        let sum: f64 = self.entries.iter().flatten().map(|s| s.abs()).sum();
        1e-9 * sum.max(1.0)
    }
}

/// A set of (row, col) pairs kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Matching { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn col_for_row(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == row).map(|p| p.1)
    }

    pub fn row_for_col(&self, col: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == col).map(|p| p.0)
    }

    /// Summed score, accumulated in pair order. Forbidden pairs panic.
    pub fn total(&self, matrix: &ScoreMatrix) -> f64 {
        self.pairs
            .iter()
            .map(|&(r, c)| matrix.get(r, c).expect("matching uses a forbidden pair"))
            .sum()
    }

    /// Checks the matching invariants against `matrix`.
    pub fn is_valid_for(&self, matrix: &ScoreMatrix) -> bool {
        let mut rows_seen = vec![false; matrix.rows()];
        let mut cols_seen = vec![false; matrix.cols()];
        self.pairs.iter().all(|&(r, c)| {
            r < matrix.rows()
                && c < matrix.cols()
                && matrix.get(r, c).is_some()
                && !std::mem::replace(&mut rows_seen[r], true)
                && !std::mem::replace(&mut cols_seen[c], true)
        })
    }
}

/// Which matcher links proposals into tracklets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matcher {
    #[default]
    Hungarian,
    Greedy,
}

impl Matcher {
    pub fn solve(self, matrix: &ScoreMatrix) -> Matching {
        match self {
            Matcher::Hungarian => hungarian_max(matrix),
            Matcher::Greedy => greedy_max(matrix),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Matcher::Hungarian => "hungarian",
            Matcher::Greedy => "greedy",
        }
    }
}

/// Repeatedly takes the highest remaining entry whose row and column are
/// both free. Equal scores go to the smaller (row, col).
pub fn greedy_max(matrix: &ScoreMatrix) -> Matching {
    let mut candidates: Vec<(f64, usize, usize)> = (0..matrix.rows())
        .flat_map(|r| (0..matrix.cols()).filter_map(move |c| matrix.get(r, c).map(|s| (s, r, c))))
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_used = vec![false; matrix.rows()];
    let mut col_used = vec![false; matrix.cols()];
    let mut pairs = Vec::new();
    for (_, r, c) in candidates {
        if !row_used[r] && !col_used[c] {
            row_used[r] = true;
            col_used[c] = true;
            pairs.push((r, c));
        }
    }
    Matching::new(pairs)
}

/// Largest dimension [`brute_force_max`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 9;

/// Exhaustive search over all partial matchings. Test oracle for
/// [`hungarian_max`]; refuses matrices with more than
/// [`BRUTE_FORCE_LIMIT`] rows or columns.
pub fn brute_force_max(matrix: &ScoreMatrix) -> Result<Matching> {
    if matrix.rows().max(matrix.cols()) > BRUTE_FORCE_LIMIT {
        return Err(Error::contract(format!(
            "brute force limited to {BRUTE_FORCE_LIMIT}x{BRUTE_FORCE_LIMIT}, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    struct Search<'a> {
        matrix: &'a ScoreMatrix,
        tol: f64,
        col_used: Vec<bool>,
        current: Vec<(usize, usize)>,
        best: Vec<(usize, usize)>,
        best_total: f64,
    }
    impl Search<'_> {
        fn visit(&mut self, row: usize) {
            if row == self.matrix.rows() {
                let total: f64 = self
                    .current
                    .iter()
                    .map(|&(r, c)| self.matrix.get(r, c).unwrap())
                    .sum();
                let better = total > self.best_total + self.tol
                    || (total >= self.best_total - self.tol && self.current < self.best);
                if better {
                    self.best.clone_from(&self.current);
                    self.best_total = total;
                }
                return;
            }
            for c in 0..self.matrix.cols() {
                if self.col_used[c] || self.matrix.get(row, c).is_none() {
                    continue;
                }
                self.col_used[c] = true;
                self.current.push((row, c));
                self.visit(row + 1);
                self.current.pop();
                self.col_used[c] = false;
            }
            self.visit(row + 1);
        }
    }
    let mut search = Search {
        matrix,
        tol: matrix.tolerance(),
        col_used: vec![false; matrix.cols()],
        current: Vec::new(),
        best: Vec::new(),
        best_total: 0.0,
    };
    search.visit(0);
    Ok(Matching::new(search.best))
}

/// Row decision pinned while searching for the lexicographically smallest optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Pin {
    Col(usize),
    Unmatched,
}

/// Square min-cost instance embedding the partial-matching problem:
///
/// ```text
///            real cols        row-dummies
/// real rows  [ -score | S ]   [ 0 on diag, S elsewhere ]
/// col-dummy  [ 0 diag, S ]    [ 0 ]
/// ```
///
/// `S` is a sentinel larger than any achievable gain, so it is never part
/// of an optimum; a real row assigned to its dummy column is unmatched.
struct PaddedProblem<'a> {
    matrix: &'a ScoreMatrix,
    sentinel: f64,
}

struct Solution {
    /// Real row -> real col.
    assignment: Vec<Option<usize>>,
    row_dual: Vec<f64>,
    col_dual: Vec<f64>,
}

impl<'a> PaddedProblem<'a> {
    fn new(matrix: &'a ScoreMatrix) -> Self {
        let n = matrix.rows() + matrix.cols();
        PaddedProblem {
            matrix,
            sentinel: 2.0 * n as f64 * matrix.max_abs().max(1.0) + 1.0,
        }
    }

    fn size(&self) -> usize {
        self.matrix.rows() + self.matrix.cols()
    }

    #[allow(clippy::needless_range_loop)]
    fn costs(&self, pins: &[Pin]) -> Vec<Vec<f64>> {
        let (rows, cols) = (self.matrix.rows(), self.matrix.cols());
        let n = self.size();
        let s = self.sentinel;
        let mut cost = vec![vec![s; n]; n];
        for r in 0..rows {
            for c in 0..cols {
                if let Some(score) = self.matrix.get(r, c) {
                    cost[r][c] = -score;
                }
            }
            cost[r][cols + r] = 0.0;
        }
        for c in 0..cols {
            cost[rows + c][c] = 0.0;
            for r in 0..rows {
                cost[rows + c][cols + r] = 0.0;
            }
        }
        for (r, pin) in pins.iter().enumerate() {
            match *pin {
                Pin::Col(c) => {
                    for j in 0..n {
                        if j != c {
                            cost[r][j] = s;
                        }
                    }
                    for i in 0..n {
                        if i != r {
                            cost[i][c] = s;
                        }
                    }
                }
                Pin::Unmatched => {
                    for c in 0..cols {
                        cost[r][c] = s;
                    }
                }
            }
        }
        cost
    }

    fn solve(&self, pins: &[Pin]) -> Solution {
        let cost = self.costs(pins);
        let (row_of_col, u, v) = hungarian_min(&cost);
        let (rows, cols) = (self.matrix.rows(), self.matrix.cols());
        let mut assignment = vec![None; rows];
        for (c, &r) in row_of_col.iter().enumerate().take(cols) {
            // Sentinel matches are discarded; they never occur at an optimum.
            if r < rows && self.matrix.get(r, c).is_some() && cost[r][c] != self.sentinel {
                assignment[r] = Some(c);
            }
        }
        Solution {
            assignment,
            row_dual: u,
            col_dual: v,
        }
    }
}

fn value_of(matrix: &ScoreMatrix, assignment: &[Option<usize>]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| matrix.get(r, c).unwrap()))
        .sum()
}

/// Exact maximum-score assignment. Maximization is solved as a min-cost
/// problem on negated scores (see [`PaddedProblem`]); ties between optima
/// are then resolved row by row towards the lexicographically smallest pair
/// list, re-solving with pinned rows only when a competing choice is tight
/// under the optimal duals.
pub fn hungarian_max(matrix: &ScoreMatrix) -> Matching {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows == 0 || cols == 0 {
        return Matching::default();
    }
    let problem = PaddedProblem::new(matrix);
    let base_cost = problem.costs(&[]);
    let first = problem.solve(&[]);
    let optimum = value_of(matrix, &first.assignment);
    let tol = matrix.tolerance();
    let reduced = |r: usize, c: usize| base_cost[r][c] - first.row_dual[r] - first.col_dual[c];
    let tight = |r: usize, c: usize| reduced(r, c).abs() <= tol;

    let mut current = first.assignment.clone();
    let mut pins: Vec<Pin> = Vec::with_capacity(rows);
    let try_pins = |pins: &[Pin], current: &mut Vec<Option<usize>>| -> bool {
        let sol = problem.solve(pins);
        if value_of(matrix, &sol.assignment) >= optimum - tol {
            *current = sol.assignment;
            true
        } else {
            false
        }
    };

    'rows: for r in 0..rows {
        // Ending the list here beats any further pair.
        let rest_free = current[r..].iter().all(Option::is_none);
        if rest_free {
            break 'rows;
        }
        if (r..rows).all(|i| tight(i, cols + i)) {
            let mut trial = pins.clone();
            trial.extend(std::iter::repeat_n(Pin::Unmatched, rows - r));
            if try_pins(&trial, &mut current) {
                break 'rows;
            }
        }
        for c in 0..cols {
            if matrix.get(r, c).is_none() || pins.contains(&Pin::Col(c)) {
                continue;
            }
            if current[r] == Some(c) {
                pins.push(Pin::Col(c));
                continue 'rows;
            }
            if tight(r, c) {
                let mut trial = pins.clone();
                trial.push(Pin::Col(c));
                if try_pins(&trial, &mut current) {
                    pins = trial;
                    continue 'rows;
                }
            }
        }
        debug_assert!(current[r].is_none());
        pins.push(Pin::Unmatched);
    }

    Matching::new(
        current
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
            .collect(),
    )
}

/// Shortest-augmenting-path Hungarian algorithm on a square cost matrix.
/// Returns the row assigned to each column plus row and column potentials
/// satisfying `u[i] + v[j] <= cost[i][j]`, with equality on assigned pairs.
fn hungarian_min(cost: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.len();
    // 1-based internally; index 0 is the virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j].partial_cmp(&delta) == Some(Ordering::Less) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let row_of_col = (1..=n).map(|j| p[j] - 1).collect();
    (row_of_col, u[1..].to_vec(), v[1..].to_vec())
}
