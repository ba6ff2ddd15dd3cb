//! Chebyshev polynomials of the first kind on Gauss–Lobatto grids.
//!
//! Series use the half-first/half-last ("double prime") convention:
//!
//! ```text
//! y(x) = Σ″ a_n T_n(x) = a_0/2 T_0 + a_1 T_1 + ... + a_{N-1} T_{N-1} + a_N/2 T_N
//! ```
//!
//! The raw coefficients are stored and every evaluator applies the half
//! weights itself.
//!
//! Derivatives of `T_n` of any order are expanded in closed form (no
//! recursion over the derivative order):
//!
//! ```text
//! T_n^(m)(x) = Σ_{l ≤ n-m, n+l+m even} [ ∏*_{i=2-m..m-2} (n² - (l+i)²) ] · n / c_l
//!              / ((m-1)! 2^(m-2)) · T_l(x)
//! ```
//!
//! where `∏*` steps `i` by two and `c_0 = 2`, `c_l = 1` otherwise.

use std::f64::consts::PI;

use thiserror::Error;

/// Tolerated overshoot of `|x|` past 1 before a point is rejected.
pub const DOMAIN_SLACK: f64 = 1e-14;

/// Largest degree accepted by [`series_to_monomial`].
pub const MAX_MONOMIAL_DEGREE: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebError {
    #[error("invalid degree {0}: must be at least 1")]
    InvalidDegree(usize),
    #[error("invalid derivative order {order} for degree {degree}")]
    InvalidOrder { order: usize, degree: usize },
    #[error("point {0} lies outside [-1, 1]")]
    Domain(f64),
    #[error("expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("monomial conversion refused for degree {0} (> {MAX_MONOMIAL_DEGREE})")]
    Conditioning(usize),
}

pub type Result<T> = std::result::Result<T, ChebError>;

/// Half weight applied to the first and last term of a `Σ″` sum over `0..=n_max`.
#[inline]
pub fn theta(index: usize, n_max: usize) -> f64 {
    if index == 0 || index == n_max {
        0.5
    } else {
        1.0
    }
}

/// `c_0 = 2`, `c_l = 1` for `l ≥ 1`.
#[inline]
pub fn c_weight(l: usize) -> f64 {
    if l == 0 {
        2.0
    } else {
        1.0
    }
}

/// Extrema of `T_N`: `x_k = cos(kπ/N)`, `k = 0..=N`, from `1` down to `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLobattoGrid {
    degree: usize,
    nodes: Vec<f64>,
}

impl GaussLobattoGrid {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(ChebError::InvalidDegree(degree));
        }
        let mut nodes = vec![0.0; degree + 1];
        // Cosines for the upper half only, mirrored so that x_k = -x_{N-k} exactly.
        for k in 0..=degree / 2 {
            let x = if 2 * k == degree {
                0.0
            } else {
                (k as f64 * PI / degree as f64).cos()
            };
            nodes[k] = x;
            nodes[degree - k] = -x;
        }
        Ok(Self { degree, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `T_n(x_k) = cos(nkπ/N)`, read off the node table after reducing the angle.
    pub fn cheb_at_node(&self, n: usize, k: usize) -> f64 {
        let period = 2 * self.degree;
        let mut r = (n * k) % period;
        if r > self.degree {
            r = period - r;
        }
        self.nodes[r]
    }
}

pub fn gauss_lobatto_nodes(degree: usize) -> Result<GaussLobattoGrid> {
    GaussLobattoGrid::new(degree)
}

/// Roots of `T_n`: `cos((2k-1)π/(2n))`, `k = 1..=n`, decreasing.
pub fn cheb_roots(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(ChebError::InvalidDegree(n));
    }
    let mut roots = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let idx = 2 * k + 1;
        let x = if idx == n {
            0.0
        } else {
            (idx as f64 * PI / (2 * n) as f64).cos()
        };
        roots[k] = x;
        roots[n - 1 - k] = -x;
    }
    Ok(roots)
}

fn check_domain(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + DOMAIN_SLACK {
        return Err(ChebError::Domain(x));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// `T_n(x)` by the three-term recurrence.
pub fn cheb_t(n: usize, x: f64) -> Result<f64> {
    let x = check_domain(x)?;
    Ok(cheb_t_unchecked(n, x))
}

fn cheb_t_unchecked(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Coefficient of `T_l` in `T_n^(m)`, zero outside the support.
pub fn deriv_coefficient(n: usize, l: usize, m: usize) -> f64 {
    if m == 0 || m > n || l + m > n || (n + l + m) % 2 == 1 {
        return 0.0;
    }
    let n2 = (n * n) as f64;
    let mut product = 1.0;
    let mut i = 2 - m as i64;
    while i <= m as i64 - 2 {
        let shifted = l as i64 + i;
        product *= n2 - (shifted * shifted) as f64;
        i += 2;
    }
    product * n as f64 / c_weight(l) / deriv_denominator(m)
}

/// `(m-1)! · 2^(m-2)`.
fn deriv_denominator(m: usize) -> f64 {
    let factorial: f64 = (1..m).map(|k| k as f64).product();
    factorial * 2f64.powi(m as i32 - 2)
}

/// Plain Chebyshev-basis coefficients of `T_n^(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivSeries {
    pub source_degree: usize,
    pub deriv_order: usize,
    /// `coeffs[l]` multiplies `T_l`; length `source_degree + 1`.
    pub coeffs: Vec<f64>,
}

impl DerivSeries {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = check_domain(x)?;
        Ok(clenshaw_plain(&self.coeffs, x))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

pub fn cheb_deriv_series(n: usize, m: usize) -> Result<DerivSeries> {
    if m == 0 {
        return Err(ChebError::InvalidOrder {
            order: m,
            degree: n,
        });
    }
    let coeffs = (0..=n).map(|l| deriv_coefficient(n, l, m)).collect();
    Ok(DerivSeries {
        source_degree: n,
        deriv_order: m,
        coeffs,
    })
}

/// Dense `(N+1)×(N+1)` map from node values to `m`-th derivative node values.
///
/// Rows and columns follow the grid order: index 0 is `x = 1`, index `N` is `x = -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    degree: usize,
    order: usize,
    entries: Vec<f64>,
}

impl DiffMatrix {
    /// ```text
    /// d_{k,j} = (θ_j/N) Σ_n Σ_l [∏* (n² - (l+i)²)] θ_n n / c_l / ((m-1)! 2^(m-3)) T_n(x_j) T_l(x_k)
    /// ```
    ///
    /// The `l` sum is done first, giving `T_n^(m)(x_k)` for every `(n, k)`,
    /// which keeps construction at `O(N³)`.
    pub fn new(degree: usize, order: usize) -> Result<Self> {
        if degree == 0 {
            return Err(ChebError::InvalidDegree(degree));
        }
        if order == 0 || order > degree {
            return Err(ChebError::InvalidOrder { order, degree });
        }
        let grid = GaussLobattoGrid::new(degree)?;
        let size = degree + 1;

        // deriv_at[n * size + k] = T_n^(m)(x_k)
        let mut deriv_at = vec![0.0; size * size];
        for n in order..=degree {
            let series = cheb_deriv_series(n, order)?;
            for k in 0..size {
                let basis: Vec<f64> = (0..=n).map(|l| grid.cheb_at_node(l, k)).collect();
                deriv_at[n * size + k] = compensated_dot(&series.coeffs, &basis);
            }
        }

        let scale = 2.0 / degree as f64;
        // weighted[j * size + n] = θ_n T_n(x_j)
        let weighted: Vec<f64> = (0..size)
            .flat_map(|j| (0..size).map(move |n| (j, n)))
            .map(|(j, n)| theta(n, degree) * grid.cheb_at_node(n, j))
            .collect();
        let mut entries = vec![0.0; size * size];
        let mut column = vec![0.0; size];
        for k in 0..size {
            for (n, c) in column.iter_mut().enumerate() {
                *c = deriv_at[n * size + k];
            }
            for j in 0..size {
                let basis = &weighted[j * size..(j + 1) * size];
                entries[k * size + j] = scale * theta(j, degree) * compensated_dot(basis, &column);
            }
        }
        Ok(Self {
            degree,
            order,
            entries,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.entries[k * self.size() + j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let size = self.size();
        &self.entries[k * size..(k + 1) * size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.size())
    }

    /// `Σ_j d_{k,j} values[j]` for a single row.
    pub fn apply_row(&self, k: usize, values: &[f64]) -> f64 {
        compensated_dot(self.row(k), values)
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.size() {
            return Err(ChebError::Shape {
                expected: self.size(),
                got: values.len(),
            });
        }
        Ok((0..self.size())
            .map(|k| self.apply_row(k, values))
            .collect())
    }
}

pub fn diff_matrix(degree: usize, order: usize) -> Result<DiffMatrix> {
    DiffMatrix::new(degree, order)
}

pub fn apply_diff(matrix: &DiffMatrix, values: &[f64]) -> Result<Vec<f64>> {
    matrix.apply(values)
}

/// Dot product carried in doubled working precision (error-free product via
/// FMA plus two-sum accumulation).
///
/// High-order rows have absolute sums around `N^(2m)` while the result is
/// O(1), so a plain sum loses most of its digits to cancellation.
pub fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let prod = x * y;
        let prod_err = x.mul_add(y, -prod);
        let t = sum + prod;
        let z = t - sum;
        let sum_err = (sum - (t - z)) + (prod - z);
        sum = t;
        comp += sum_err + prod_err;
    }
    sum + comp
}

/// Coefficients `a_0..a_N` of a `Σ″` Chebyshev series.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(ChebError::InvalidDegree(0));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients with the `Σ″` half weights folded in.
    fn weighted(&self) -> Vec<f64> {
        let last = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, &a)| a * theta(n, last))
            .collect()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = check_domain(x)?;
        Ok(clenshaw_plain(&self.weighted(), x))
    }

    /// Plain coefficients (no half weights) of the `m`-th derivative.
    pub fn derivative_coeffs(&self, m: usize) -> Result<Vec<f64>> {
        if m == 0 {
            return Ok(self.weighted());
        }
        let weighted = self.weighted();
        let mut out = vec![0.0; weighted.len()];
        for (n, &a) in weighted.iter().enumerate() {
            if a == 0.0 || m > n {
                continue;
            }
            let series = cheb_deriv_series(n, m)?;
            for (o, c) in out.iter_mut().zip(&series.coeffs) {
                *o += a * c;
            }
        }
        Ok(out)
    }

    pub fn eval_derivative(&self, x: f64, m: usize) -> Result<f64> {
        let x = check_domain(x)?;
        let coeffs = self.derivative_coeffs(m)?;
        Ok(clenshaw_plain(&coeffs, x))
    }
}

/// `Σ b_n T_n(x)` (no half weights) by backward recurrence.
fn clenshaw_plain(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&c0) => c0 + x * b1 - b2,
        None => 0.0,
    }
}

/// `a_n = (2/N) Σ″_{j=0..N} values[j] T_n(x_j)` for values sampled on the grid.
pub fn cheb_coeffs(values: &[f64]) -> Result<ChebSeries> {
    if values.len() < 2 {
        return Err(ChebError::InvalidDegree(values.len().saturating_sub(1)));
    }
    let degree = values.len() - 1;
    let grid = GaussLobattoGrid::new(degree)?;
    let scale = 2.0 / degree as f64;
    let coeffs = (0..=degree)
        .map(|n| {
            let sum: f64 = values
                .iter()
                .enumerate()
                .map(|(j, &v)| theta(j, degree) * v * grid.cheb_at_node(n, j))
                .sum();
            scale * sum
        })
        .collect();
    ChebSeries::new(coeffs)
}

pub fn series_eval(series: &ChebSeries, x: f64) -> Result<f64> {
    series.eval(x)
}

/// Monomial coefficients `c_0..c_N` of `T_n`, for `n = 0..=degree`.
fn cheb_monomial_table(degree: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    table.push(vec![1.0]);
    if degree >= 1 {
        table.push(vec![0.0, 1.0]);
    }
    for n in 2..=degree {
        let mut next = vec![0.0; n + 1];
        for (p, &c) in table[n - 1].iter().enumerate() {
            next[p + 1] += 2.0 * c;
        }
        for (p, &c) in table[n - 2].iter().enumerate() {
            next[p] -= c;
        }
        table.push(next);
    }
    table
}

/// Monomial coefficients `c_0..c_N` with `Σ c_p x^p ≡ Σ″ a_n T_n(x)`.
pub fn series_to_monomial(series: &ChebSeries) -> Result<Vec<f64>> {
    let degree = series.degree();
    if degree > MAX_MONOMIAL_DEGREE {
        return Err(ChebError::Conditioning(degree));
    }
    let table = cheb_monomial_table(degree);
    let mut out = vec![0.0; degree + 1];
    for (a, row) in series.weighted().iter().zip(&table) {
        for (o, c) in out.iter_mut().zip(row) {
            *o += a * c;
        }
    }
    Ok(out)
}
