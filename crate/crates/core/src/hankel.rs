//! Truncated Hankel matrices over the group and over the circle.
//!
//! A truncation of `H_φ` is indexed by rows `ξ ∈ X₋` (descending, closest to
//! the identity first) and columns `χ ∈ X₊` (ascending, identity first); the
//! entry at `(ξ, χ)` is the coefficient of the symbol at `ξ − χ`.
//!
//! The Toeplitz-type operators `C_ν − 𝒢_ν` are not built here.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered_group::{ConeSign, GroupElement, OrderSpec, TruncationBox};
use crate::symbols::FourierSymbol;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct HankelMatrix {
    pub spec: OrderSpec,
    pub rows: Vec<GroupElement>,
    pub cols: Vec<GroupElement>,
    pub entries: DMatrix<C64>,
}

/// JSON export of a truncated operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: Vec<GroupElement>,
    pub cols: Vec<GroupElement>,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

fn fill(
    rows: &[GroupElement],
    cols: &[GroupElement],
    f: impl Fn(&GroupElement, &GroupElement) -> C64 + Sync,
) -> DMatrix<C64> {
    let data: Vec<Vec<C64>> = rows.par_iter().map(|r| cols.iter().map(|c| f(r, c)).collect()).collect();
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| data[i][j])
}

fn index_of(v: &[GroupElement]) -> HashMap<&GroupElement, usize> {
    v.iter().enumerate().map(|(i, e)| (e, i)).collect()
}

impl HankelMatrix {
    /// Builds a matrix over arbitrary row and column index lists from an
    /// entry function.
    pub fn from_fn(
        spec: OrderSpec,
        rows: Vec<GroupElement>,
        cols: Vec<GroupElement>,
        f: impl Fn(&GroupElement, &GroupElement) -> C64 + Sync,
    ) -> Self {
        let entries = fill(&rows, &cols, f);
        HankelMatrix { spec, rows, cols, entries }
    }

    pub fn entry(&self, row: &GroupElement, col: &GroupElement) -> Option<C64> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.cols.iter().position(|c| c == col)?;
        Some(self.entries[(i, j)])
    }

    /// Number of index pairs whose entry differs from another pair with the
    /// same difference `ξ − χ` (exact comparison).
    pub fn structure_violations(&self) -> Result<usize> {
        let mut seen: HashMap<GroupElement, C64> = HashMap::new();
        let mut bad = 0;
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                let d = self.spec.sub(r, c)?;
                let v = self.entries[(i, j)];
                match seen.get(&d) {
                    Some(w) if *w != v => bad += 1,
                    Some(_) => {}
                    None => {
                        seen.insert(d, v);
                    }
                }
            }
        }
        Ok(bad)
    }

    pub fn to_json(&self) -> MatrixJson {
        let mut entries = Vec::with_capacity(self.rows.len() * self.cols.len());
        for i in 0..self.rows.len() {
            for j in 0..self.cols.len() {
                let v = self.entries[(i, j)];
                entries.push([v.re, v.im]);
            }
        }
        MatrixJson { rows: self.rows.clone(), cols: self.cols.clone(), entries }
    }

    /// `row,col,re,im` lines for the nonzero entries, with integer indices
    /// into `rows` and `cols`.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.entries)
    }
}

pub fn matrix_csv(m: &DMatrix<C64>) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push_str(&format!("{i},{j},{:e},{:e}\n", v.re, v.im));
            }
        }
    }
    out
}

/// The truncation of `H_φ` to `X₋ ∩ box` × `X₊ ∩ box`.
pub fn build_hankel(s: &FourierSymbol, spec: &OrderSpec, bx: TruncationBox) -> Result<HankelMatrix> {
    s.validate(spec)?;
    let rows = spec.enumerate_cone(bx, ConeSign::Neg);
    let cols = spec.enumerate_cone(bx, ConeSign::Nonneg);
    Ok(HankelMatrix::from_fn(*spec, rows, cols, |r, c| s.get(&spec.sub(r, c).expect("box elements are valid"))))
}

/// Classical Hankel matrix `H[j][k] = c_{j+k+1}` (rows `z̄^{j+1}`, columns `zᵏ`).
#[derive(Clone, Debug, PartialEq)]
pub struct CircleHankel {
    pub entries: DMatrix<C64>,
    /// Set when fewer than `rows + cols − 1` coefficients were supplied.
    pub padded: bool,
}

impl CircleHankel {
    pub fn rect(c: &[C64], rows: usize, cols: usize) -> Self {
        let need = (rows + cols).saturating_sub(1);
        let entries = DMatrix::from_fn(rows, cols, |j, k| c.get(j + k).copied().unwrap_or(ZERO));
        CircleHankel { entries, padded: c.len() < need }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest difference along anti-diagonals.
    pub fn antidiagonal_residual(&self) -> f64 {
        let m = &self.entries;
        let mut worst = 0.0f64;
        for j in 0..m.nrows().saturating_sub(1) {
            for k in 1..m.ncols() {
                worst = worst.max((m[(j, k)] - m[(j + 1, k - 1)]).norm());
            }
        }
        worst
    }

    /// Reads the matrix as a truncation over `IntLex(1)` with rows
    /// `−1, −2, …` and columns `0, 1, …`.
    pub fn as_group_matrix(&self) -> HankelMatrix {
        let rows = (1..=self.entries.nrows() as i64).map(|k| GroupElement::int(&[-k])).collect();
        let cols = (0..self.entries.ncols() as i64).map(|k| GroupElement::int(&[k])).collect();
        HankelMatrix { spec: OrderSpec::IntLex { n: 1 }, rows, cols, entries: self.entries.clone() }
    }
}

/// Square `N × N` classical Hankel matrix, zero-padded when `c` is short.
pub fn build_circle_hankel(c: &[C64], n: usize) -> CircleHankel {
    CircleHankel::rect(c, n, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    /// Rows `−χ₁, −2χ₁, …` by columns `0, χ₁, 2χ₁, …` present in the truncation.
    pub cyclic: DMatrix<C64>,
    pub cyclic_rows: Vec<usize>,
    pub cyclic_cols: Vec<usize>,
    /// Max modulus over entries whose column lies in `X₊∖Xⁱ`.
    pub complement_cols_norm: f64,
    /// Max modulus over entries whose row lies outside `Xⁱ`.
    pub complement_rows_norm: f64,
}

/// Splits a truncation along `Xⁱ` versus its complement.
pub fn block_decomposition(h: &HankelMatrix) -> Result<BlockDecomposition> {
    let spec = &h.spec;
    spec.least_positive().ok_or(Error::NoLeastPositive)?;
    let mut row_cyc: Vec<(i64, usize)> = Vec::new();
    let mut row_cyclic = vec![false; h.rows.len()];
    for (i, r) in h.rows.iter().enumerate() {
        if let Some(k) = spec.cyclic_index(r)? {
            row_cyc.push((-k, i));
            row_cyclic[i] = true;
        }
    }
    let mut col_cyc: Vec<(i64, usize)> = Vec::new();
    let mut col_cyclic = vec![false; h.cols.len()];
    for (j, c) in h.cols.iter().enumerate() {
        if let Some(k) = spec.cyclic_index(c)? {
            col_cyc.push((k, j));
            col_cyclic[j] = true;
        }
    }
    row_cyc.sort();
    col_cyc.sort();
    let cyclic = DMatrix::from_fn(row_cyc.len(), col_cyc.len(), |a, b| h.entries[(row_cyc[a].1, col_cyc[b].1)]);

    let mut cols_norm = 0.0f64;
    let mut rows_norm = 0.0f64;
    for i in 0..h.rows.len() {
        for j in 0..h.cols.len() {
            let v = h.entries[(i, j)].norm();
            if !col_cyclic[j] {
                cols_norm = cols_norm.max(v);
            }
            if !row_cyclic[i] {
                rows_norm = rows_norm.max(v);
            }
        }
    }
    Ok(BlockDecomposition {
        cyclic,
        cyclic_rows: row_cyc.iter().map(|(k, _)| *k as usize).collect(),
        cyclic_cols: col_cyc.iter().map(|(k, _)| *k as usize).collect(),
        complement_cols_norm: cols_norm,
        complement_rows_norm: rows_norm,
    })
}

/// Largest violation of `H S_χ = P₋ S_χ H` on the interior of the
/// truncation: `|H(ξ, χ′ + χ) − H(ξ − χ, χ′)|` over index pairs where both
/// entries are present.
pub fn commutation_residual(h: &HankelMatrix, chi: &GroupElement) -> Result<f64> {
    let spec = &h.spec;
    if !spec.is_nonneg(chi)? {
        return Err(Error::NotPositive(chi.to_string()));
    }
    let rows = index_of(&h.rows);
    let cols = index_of(&h.cols);
    let col_pairs: Vec<(usize, usize)> = h
        .cols
        .iter()
        .enumerate()
        .filter_map(|(j, c)| {
            let shifted = spec.add(c, chi).ok()?;
            cols.get(&shifted).map(|&js| (j, js))
        })
        .collect();
    let row_pairs: Vec<(usize, usize)> = h
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let shifted = spec.sub(r, chi).ok()?;
            rows.get(&shifted).map(|&is| (i, is))
        })
        .collect();
    let mut worst = 0.0f64;
    for &(i, is) in &row_pairs {
        for &(j, js) in &col_pairs {
            worst = worst.max((h.entries[(i, js)] - h.entries[(is, j)]).norm());
        }
    }
    Ok(worst)
}

/// A function on the dual group used as the kernel of `Γ` (supported in
/// `X₊`) or of `𝒢_ν` (supported anywhere).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscreteKernel {
    pub values: BTreeMap<GroupElement, C64>,
}

impl DiscreteKernel {
    pub fn from_terms(terms: impl IntoIterator<Item = (GroupElement, C64)>) -> Self {
        DiscreteKernel { values: terms.into_iter().collect() }
    }

    pub fn get(&self, e: &GroupElement) -> C64 {
        self.values.get(e).copied().unwrap_or(ZERO)
    }

    /// Checks that the support lies in `X₊`.
    pub fn check_nonneg(&self, spec: &OrderSpec) -> Result<()> {
        for e in self.values.keys() {
            if !spec.is_nonneg(e)? {
                return Err(Error::InvalidArgument(format!("Γ kernel supported at negative element {e}")));
            }
        }
        Ok(())
    }
}

/// `Γ` on `ℓ²(X₊)`: entry at `(ξ, χ)` equals `a(χ + ξ)`.
pub fn build_gamma(a: &DiscreteKernel, spec: &OrderSpec, bx: TruncationBox) -> Result<HankelMatrix> {
    a.check_nonneg(spec)?;
    let idx = spec.enumerate_cone(bx, ConeSign::Nonneg);
    Ok(HankelMatrix::from_fn(*spec, idx.clone(), idx, |r, c| a.get(&spec.add(c, r).expect("valid"))))
}

/// `𝒢_ν: ℓ²(X₊) → ℓ²(X₋)`: entry at `(ξ, χ)` equals `ν(ξ − χ)`.
pub fn build_g(nu: &DiscreteKernel, spec: &OrderSpec, bx: TruncationBox) -> Result<HankelMatrix> {
    for e in nu.values.keys() {
        spec.check(e)?;
    }
    let rows = spec.enumerate_cone(bx, ConeSign::Neg);
    let cols = spec.enumerate_cone(bx, ConeSign::Nonneg);
    Ok(HankelMatrix::from_fn(*spec, rows, cols, |r, c| nu.get(&spec.sub(r, c).expect("valid"))))
}

/// `P₋φ = Σ_{ξ∈X₋} a(−(ξ + χ₁))·ξ`, the symbol of the Hankel operator
/// unitarily equivalent to `Γ`.
pub fn gamma_symbol(a: &DiscreteKernel, spec: &OrderSpec) -> Result<FourierSymbol> {
    let chi1 = spec.least_positive().ok_or(Error::NoLeastPositive)?;
    a.check_nonneg(spec)?;
    let mut terms = Vec::new();
    for (chi, v) in &a.values {
        // ξ = −(χ + χ₁) is strictly negative since χ ≥ 0
        terms.push((spec.negate(&spec.add(chi, &chi1)?)?, *v));
    }
    Ok(FourierSymbol::from_terms(terms))
}

/// Row bijection `ξ ↦ −(ξ + χ₁)` from `X₊` to `X₋`.
pub fn gamma_row_map(spec: &OrderSpec, xi: &GroupElement) -> Result<GroupElement> {
    let chi1 = spec.least_positive().ok_or(Error::NoLeastPositive)?;
    spec.negate(&spec.add(xi, &chi1)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Rows compared after the bijection.
    pub rows_compared: usize,
    /// Entries that differ (exact comparison).
    pub mismatches: usize,
}

/// Compares `Γ` with `H_{gamma_symbol(a)}` row by row under
/// `ξ ↦ −(ξ + χ₁)`, on rows whose image lies in the truncation.
pub fn gamma_equivalence(a: &DiscreteKernel, spec: &OrderSpec, bx: TruncationBox) -> Result<EquivalenceReport> {
    let gamma = build_gamma(a, spec, bx)?;
    let h = build_hankel(&gamma_symbol(a, spec)?, spec, bx)?;
    if gamma.cols != h.cols {
        return Err(Error::Verification("column index sets differ".into()));
    }
    let h_rows = index_of(&h.rows);
    let mut report = EquivalenceReport { rows_compared: 0, mismatches: 0 };
    for (i, xi) in gamma.rows.iter().enumerate() {
        let image = gamma_row_map(spec, xi)?;
        if let Some(&ih) = h_rows.get(&image) {
            report.rows_compared += 1;
            for j in 0..gamma.cols.len() {
                if gamma.entries[(i, j)] != h.entries[(ih, j)] {
                    report.mismatches += 1;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::pullback_support;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn lex(n: usize) -> OrderSpec {
        OrderSpec::IntLex { n }
    }

    fn sym(terms: &[(&[i64], f64)]) -> FourierSymbol {
        FourierSymbol::from_terms(terms.iter().map(|(e, v)| (GroupElement::int(e), c(*v))))
    }

    #[test]
    fn conj_chi1_on_integers() {
        let h = build_hankel(&sym(&[(&[-1], 1.0)]), &lex(1), TruncationBox::new(2)).unwrap();
        assert_eq!(h.rows, vec![GroupElement::int(&[-1]), GroupElement::int(&[-2])]);
        assert_eq!(h.cols.len(), 3);
        let want = DMatrix::from_row_slice(2, 3, &[c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(h.entries, want);

        // analytic terms do not change the operator
        let h2 = build_hankel(&sym(&[(&[-1], 1.0), (&[2], 7.0)]), &lex(1), TruncationBox::new(2)).unwrap();
        assert_eq!(h, h2);
    }

    #[test]
    fn direct_lookup_over_lex2() {
        let s = sym(&[(&[0, -1], 1.0)]);
        let h = build_hankel(&s, &lex(2), TruncationBox::new(1)).unwrap();
        assert_eq!(h.entry(&GroupElement::int(&[0, -1]), &GroupElement::int(&[0, 0])), Some(c(1.0)));
        let col = h.cols.iter().position(|e| *e == GroupElement::int(&[1, 0])).unwrap();
        assert!(h.entries.column(col).iter().all(|v| *v == c(0.0)));
        assert_eq!(h.structure_violations().unwrap(), 0);
    }

    #[test]
    fn circle_examples() {
        assert_eq!(build_circle_hankel(&[c(1.0)], 1).entries, DMatrix::from_element(1, 1, c(1.0)));
        let g: Vec<C64> = (0..5).map(|k| c(0.5f64.powi(k))).collect();
        let h = build_circle_hankel(&g, 3);
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(h.entries[(j, k)], c(0.5f64.powi((j + k) as i32)));
            }
        }
        assert!(!h.padded);
        assert_eq!(h.antidiagonal_residual(), 0.0);
        let z = build_circle_hankel(&[], 4);
        assert!(z.padded);
        assert!(z.entries.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn block_decomposition_examples() {
        let spec = lex(2);
        let s = pullback_support(&[c(1.0), c(1.0)], &spec).unwrap();
        let h = build_hankel(&s, &spec, TruncationBox::new(3)).unwrap();
        let b = block_decomposition(&h).unwrap();
        assert_eq!(b.complement_cols_norm, 0.0);
        assert_eq!(b.complement_rows_norm, 0.0);
        let circle = CircleHankel::rect(&[c(1.0), c(1.0)], b.cyclic.nrows(), b.cyclic.ncols());
        assert_eq!(b.cyclic, circle.entries);
        assert_eq!(b.cyclic[(0, 0)], c(1.0));
        assert_eq!(b.cyclic[(0, 1)], c(1.0));
        assert_eq!(b.cyclic[(1, 0)], c(1.0));
        assert_eq!(b.cyclic[(1, 1)], c(0.0));

        let h = build_hankel(&sym(&[(&[-1, 0], 1.0)]), &spec, TruncationBox::new(3)).unwrap();
        let b = block_decomposition(&h).unwrap();
        assert_eq!(b.complement_rows_norm, 1.0);

        let h = build_hankel(&FourierSymbol::new(), &spec, TruncationBox::new(2)).unwrap();
        let b = block_decomposition(&h).unwrap();
        assert!(b.cyclic.iter().all(|v| *v == c(0.0)));
        assert_eq!(b.complement_rows_norm, 0.0);

        let q = build_hankel(&FourierSymbol::new(), &OrderSpec::IntQuadratic, TruncationBox::new(1)).unwrap();
        assert!(matches!(block_decomposition(&q), Err(Error::NoLeastPositive)));
    }

    #[test]
    fn commutation_examples() {
        let spec = lex(2);
        let s = sym(&[(&[0, -1], 1.0), (&[-1, 3], 0.5), (&[0, -3], -2.0)]);
        let mut h = build_hankel(&s, &spec, TruncationBox::new(3)).unwrap();
        for chi in [[0, 0], [0, 1], [0, 2], [1, -2], [1, 0]] {
            assert_eq!(commutation_residual(&h, &GroupElement::int(&chi)).unwrap(), 0.0);
        }
        let i = h.rows.iter().position(|e| *e == GroupElement::int(&[0, -1])).unwrap();
        let j = h.cols.iter().position(|e| *e == GroupElement::int(&[0, 1])).unwrap();
        h.entries[(i, j)] += c(1e-3);
        let r = commutation_residual(&h, &GroupElement::int(&[0, 1])).unwrap();
        assert!(r >= 1e-3 - 1e-15);
        assert!(commutation_residual(&h, &GroupElement::int(&[0, -1])).is_err());

        let z = build_hankel(&FourierSymbol::new(), &spec, TruncationBox::new(2)).unwrap();
        assert_eq!(commutation_residual(&z, &GroupElement::int(&[0, 1])).unwrap(), 0.0);
    }

    #[test]
    fn gamma_and_g_examples() {
        let spec = lex(1);
        let bx = TruncationBox::new(2);
        let a = DiscreteKernel::from_terms([(GroupElement::int(&[0]), c(1.0))]);
        let g = build_gamma(&a, &spec, bx).unwrap();
        assert_eq!(g.entries[(0, 0)], c(1.0));
        assert_eq!(g.entries.iter().filter(|v| **v != c(0.0)).count(), 1);

        let nu = DiscreteKernel::from_terms([(GroupElement::int(&[-1]), c(1.0))]);
        let gm = build_g(&nu, &spec, bx).unwrap();
        let h = build_hankel(&sym(&[(&[-1], 1.0)]), &spec, bx).unwrap();
        assert_eq!(gm, h);

        let a = DiscreteKernel::from_terms((0..6).map(|k| (GroupElement::int(&[k]), c(0.5f64.powi(k as i32)))));
        let g = build_gamma(&a, &spec, bx).unwrap();
        let want = DMatrix::from_fn(3, 3, |i, j| c(0.5f64.powi((i + j) as i32)));
        assert_eq!(g.entries, want);

        let bad = DiscreteKernel::from_terms([(GroupElement::int(&[-1]), c(1.0))]);
        assert!(build_gamma(&bad, &spec, bx).is_err());
    }

    #[test]
    fn gamma_symbol_examples() {
        let a = DiscreteKernel::from_terms([(GroupElement::int(&[0]), c(1.0))]);
        assert_eq!(gamma_symbol(&a, &lex(1)).unwrap(), sym(&[(&[-1], 1.0)]));
        assert!(gamma_symbol(&DiscreteKernel::default(), &lex(1)).unwrap().is_empty());
        let a = DiscreteKernel::from_terms([(GroupElement::int(&[0, 1]), c(3.0))]);
        assert_eq!(gamma_symbol(&a, &lex(2)).unwrap(), sym(&[(&[0, -2], 3.0)]));
        assert!(gamma_symbol(&a, &OrderSpec::IntQuadratic).is_err());

        let a = DiscreteKernel::from_terms([
            (GroupElement::int(&[0, 1]), c(3.0)),
            (GroupElement::int(&[1, -2]), C64::new(0.5, -1.0)),
            (GroupElement::int(&[0, 0]), c(-1.0)),
        ]);
        let r = gamma_equivalence(&a, &lex(2), TruncationBox::new(3)).unwrap();
        assert!(r.rows_compared > 0);
        assert_eq!(r.mismatches, 0);
    }

    #[test]
    fn exports() {
        let h = build_hankel(&sym(&[(&[-1], 1.0)]), &lex(1), TruncationBox::new(1)).unwrap();
        assert_eq!(h.to_csv(), "row,col,re,im\n0,0,1e0,0e0\n");
        let j = serde_json::to_string(&h.to_json()).unwrap();
        assert_eq!(j, r#"{"rows":[[-1]],"cols":[[0],[1]],"entries":[[1.0,0.0],[0.0,0.0]]}"#);
    }
}
