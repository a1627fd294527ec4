//! QUBO and Ising models over a fixed variable count.
//!
//! Both forms keep a sparse upper-triangular quadratic part, a linear part
//! and a constant offset. Models are immutable once built; use
//! [`QuboBuilder`] / [`IsingBuilder`] to assemble them term by term.
//!
//! Conversions use `x = (1 + s) / 2` and its inverse. They only multiply by
//! powers of two, so integer-coefficient models convert without rounding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{SpinKind, SpinVector};

pub type Labels = BTreeMap<usize, String>;

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

fn ordered_pair(i: usize, j: usize, n: usize) -> Result<(usize, usize)> {
    check_index(i, n)?;
    check_index(j, n)?;
    match i.cmp(&j) {
        std::cmp::Ordering::Less => Ok((i, j)),
        std::cmp::Ordering::Greater => Ok((j, i)),
        std::cmp::Ordering::Equal => Err(Error::DiagonalTerm(i)),
    }
}

fn prune<K: Ord>(map: BTreeMap<K, f64>) -> BTreeMap<K, f64> {
    map.into_iter().filter(|(_, c)| *c != 0.0).collect()
}

/// Sparse quadratic form shared by both model kinds.
#[derive(Debug, Clone, PartialEq, Default)]
struct Terms {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    labels: Labels,
}

impl Terms {
    fn new(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    fn add_linear(&mut self, i: usize, c: f64) -> Result<()> {
        check_index(i, self.n)?;
        *self.linear.entry(i).or_insert(0.0) += c;
        Ok(())
    }

    fn add_quadratic(&mut self, i: usize, j: usize, c: f64) -> Result<()> {
        let key = ordered_pair(i, j, self.n)?;
        *self.quadratic.entry(key).or_insert(0.0) += c;
        Ok(())
    }

    fn set_label(&mut self, i: usize, label: String) -> Result<()> {
        check_index(i, self.n)?;
        self.labels.insert(i, label);
        Ok(())
    }

    fn finish(mut self) -> Self {
        self.linear = prune(self.linear);
        self.quadratic = prune(self.quadratic);
        self
    }

    fn is_integral(&self) -> bool {
        let int = |c: &f64| c.fract() == 0.0 && c.abs() < 2f64.powi(52);
        int(&self.offset) && self.linear.values().all(int) && self.quadratic.values().all(int)
    }
}

macro_rules! model_accessors {
    () => {
        pub fn labels(&self) -> &Labels {
            &self.terms.labels
        }

        pub fn label(&self, i: usize) -> Option<&str> {
            self.terms.labels.get(&i).map(String::as_str)
        }

        pub fn offset(&self) -> f64 {
            self.terms.offset
        }

        /// True when every coefficient is an integer small enough for exact
        /// `f64` accumulation.
        pub fn is_integral(&self) -> bool {
            self.terms.is_integral()
        }

        /// Same model with the constant term shifted by `c`.
        pub fn shifted(&self, c: f64) -> Self {
            let mut terms = self.terms.clone();
            terms.offset += c;
            Self { terms }
        }

        /// Same model with every coefficient (and the offset) multiplied by `c`.
        pub fn scaled(&self, c: f64) -> Self {
            let mut terms = self.terms.clone();
            terms.offset *= c;
            terms.linear.values_mut().for_each(|v| *v *= c);
            terms.quadratic.values_mut().for_each(|v| *v *= c);
            Self {
                terms: terms.finish(),
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    terms: Terms,
}

#[derive(Debug, Clone)]
pub struct QuboBuilder {
    terms: Terms,
}

impl QuboBuilder {
    pub fn new(n_vars: usize) -> Self {
        Self {
            terms: Terms::new(n_vars),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.terms.n
    }

    pub fn add_linear(&mut self, i: usize, c: f64) -> Result<&mut Self> {
        self.terms.add_linear(i, c)?;
        Ok(self)
    }

    /// Accumulates `c * x_i * x_j`; `i == j` is rejected.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) -> Result<&mut Self> {
        self.terms.add_quadratic(i, j, c)?;
        Ok(self)
    }

    pub fn add_offset(&mut self, c: f64) -> &mut Self {
        self.terms.offset += c;
        self
    }

    pub fn set_label(&mut self, i: usize, label: impl Into<String>) -> Result<&mut Self> {
        self.terms.set_label(i, label.into())?;
        Ok(self)
    }

    /// Adds `weight * (constant + sum_k coeff_k x_k)^2`, folding `x^2 = x`.
    pub fn add_squared_linear_form(&mut self, weight: f64, constant: f64, form: &[(usize, f64)]) -> Result<&mut Self> {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(i, c) in form {
            check_index(i, self.terms.n)?;
            *merged.entry(i).or_insert(0.0) += c;
        }
        let form: Vec<(usize, f64)> = merged.into_iter().collect();
        self.terms.offset += weight * constant * constant;
        for (a, &(i, ci)) in form.iter().enumerate() {
            self.terms.add_linear(i, weight * (ci * ci + 2.0 * constant * ci))?;
            for &(j, cj) in &form[a + 1..] {
                self.terms.add_quadratic(i, j, 2.0 * weight * ci * cj)?;
            }
        }
        Ok(self)
    }

    pub fn build(self) -> QuboModel {
        QuboModel {
            terms: self.terms.finish(),
        }
    }
}

impl QuboModel {
    pub fn zero(n_vars: usize) -> Self {
        QuboBuilder::new(n_vars).build()
    }

    pub fn builder(n_vars: usize) -> QuboBuilder {
        QuboBuilder::new(n_vars)
    }

    /// Validating constructor from raw term lists. Repeated keys accumulate.
    pub fn from_terms(
        n_vars: usize,
        linear: impl IntoIterator<Item = (usize, f64)>,
        quadratic: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
        labels: Labels,
    ) -> Result<Self> {
        let mut b = QuboBuilder::new(n_vars);
        for (i, c) in linear {
            b.add_linear(i, c)?;
        }
        for (i, j, c) in quadratic {
            b.add_quadratic(i, j, c)?;
        }
        b.add_offset(offset);
        for (i, l) in labels {
            b.set_label(i, l)?;
        }
        Ok(b.build())
    }

    pub fn n_vars(&self) -> usize {
        self.terms.n
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.terms.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.terms.quadratic
    }

    pub fn linear_coeff(&self, i: usize) -> f64 {
        self.terms.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.terms.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    model_accessors!();

    /// `offset + sum_i a_i x_i + sum_{i<j} b_ij x_i x_j`.
    pub fn energy(&self, x: &SpinVector) -> Result<f64> {
        if x.len() != self.terms.n {
            return Err(Error::Dimension {
                expected: self.terms.n,
                got: x.len(),
            });
        }
        let mut e = self.terms.offset;
        for (&i, &c) in &self.terms.linear {
            if x.get(i) {
                e += c;
            }
        }
        for (&(i, j), &c) in &self.terms.quadratic {
            if x.get(i) && x.get(j) {
                e += c;
            }
        }
        Ok(e)
    }

    pub fn to_ising(&self) -> IsingModel {
        let mut t = Terms::new(self.terms.n);
        t.offset = self.terms.offset;
        t.labels = self.terms.labels.clone();
        for (&i, &c) in &self.terms.linear {
            *t.linear.entry(i).or_insert(0.0) += c / 2.0;
            t.offset += c / 2.0;
        }
        for (&(i, j), &c) in &self.terms.quadratic {
            let q = c / 4.0;
            t.quadratic.insert((i, j), q);
            *t.linear.entry(i).or_insert(0.0) += q;
            *t.linear.entry(j).or_insert(0.0) += q;
            t.offset += q;
        }
        IsingModel { terms: t.finish() }
    }

    pub fn compile(&self) -> CompiledQubo {
        CompiledQubo::new(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    terms: Terms,
}

#[derive(Debug, Clone)]
pub struct IsingBuilder {
    terms: Terms,
}

impl IsingBuilder {
    pub fn new(n_spins: usize) -> Self {
        Self {
            terms: Terms::new(n_spins),
        }
    }

    pub fn add_field(&mut self, i: usize, h: f64) -> Result<&mut Self> {
        self.terms.add_linear(i, h)?;
        Ok(self)
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, j_ij: f64) -> Result<&mut Self> {
        self.terms.add_quadratic(i, j, j_ij)?;
        Ok(self)
    }

    pub fn add_offset(&mut self, c: f64) -> &mut Self {
        self.terms.offset += c;
        self
    }

    pub fn set_label(&mut self, i: usize, label: impl Into<String>) -> Result<&mut Self> {
        self.terms.set_label(i, label.into())?;
        Ok(self)
    }

    pub fn build(self) -> IsingModel {
        IsingModel {
            terms: self.terms.finish(),
        }
    }
}

impl IsingModel {
    pub fn zero(n_spins: usize) -> Self {
        IsingBuilder::new(n_spins).build()
    }

    pub fn builder(n_spins: usize) -> IsingBuilder {
        IsingBuilder::new(n_spins)
    }

    pub fn from_terms(
        n_spins: usize,
        fields: impl IntoIterator<Item = (usize, f64)>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
        labels: Labels,
    ) -> Result<Self> {
        let mut b = IsingBuilder::new(n_spins);
        for (i, h) in fields {
            b.add_field(i, h)?;
        }
        for (i, j, c) in couplings {
            b.add_coupling(i, j, c)?;
        }
        b.add_offset(offset);
        for (i, l) in labels {
            b.set_label(i, l)?;
        }
        Ok(b.build())
    }

    pub fn n_spins(&self) -> usize {
        self.terms.n
    }

    pub fn fields(&self) -> &BTreeMap<usize, f64> {
        &self.terms.linear
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.terms.quadratic
    }

    pub fn field(&self, i: usize) -> f64 {
        self.terms.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.terms.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    model_accessors!();

    /// `offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j` with `s = 2x - 1`.
    pub fn energy(&self, s: &SpinVector) -> Result<f64> {
        if s.len() != self.terms.n {
            return Err(Error::Dimension {
                expected: self.terms.n,
                got: s.len(),
            });
        }
        let mut e = self.terms.offset;
        for (&i, &h) in &self.terms.linear {
            e += h * s.spin(i);
        }
        for (&(i, j), &c) in &self.terms.quadratic {
            e += c * s.spin(i) * s.spin(j);
        }
        Ok(e)
    }

    /// Energy of explicit ±1 values; any other entry is a domain error.
    pub fn energy_of_spins(&self, spins: &[i8]) -> Result<f64> {
        self.energy(&SpinVector::from_spins(spins)?)
    }

    pub fn to_qubo(&self) -> QuboModel {
        let mut t = Terms::new(self.terms.n);
        t.offset = self.terms.offset;
        t.labels = self.terms.labels.clone();
        for (&i, &h) in &self.terms.linear {
            *t.linear.entry(i).or_insert(0.0) += 2.0 * h;
            t.offset -= h;
        }
        for (&(i, j), &c) in &self.terms.quadratic {
            t.quadratic.insert((i, j), 4.0 * c);
            *t.linear.entry(i).or_insert(0.0) -= 2.0 * c;
            *t.linear.entry(j).or_insert(0.0) -= 2.0 * c;
            t.offset += c;
        }
        QuboModel { terms: t.finish() }
    }
}

pub fn qubo_energy(model: &QuboModel, x: &SpinVector) -> Result<f64> {
    model.energy(x)
}

pub fn ising_energy(model: &IsingModel, s: &SpinVector) -> Result<f64> {
    model.energy(s)
}

pub fn qubo_to_ising(model: &QuboModel) -> IsingModel {
    model.to_ising()
}

pub fn ising_to_qubo(model: &IsingModel) -> QuboModel {
    model.to_qubo()
}

/// Dense-row adjacency view of a QUBO for inner loops (sampling, enumeration).
///
/// Each quadratic term is stored in both rows so the local field of any
/// variable is a single contiguous scan.
#[derive(Debug, Clone)]
pub struct CompiledQubo {
    n: usize,
    offset: f64,
    linear: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    integral: bool,
}

impl CompiledQubo {
    pub fn new(model: &QuboModel) -> Self {
        let n = model.n_vars();
        let mut linear = vec![0.0; n];
        for (&i, &c) in model.linear() {
            linear[i] = c;
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &c) in model.quadratic() {
            rows[i].push((j, c));
            rows[j].push((i, c));
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for row in rows {
            for (j, c) in row {
                cols.push(j);
                vals.push(c);
            }
            row_start.push(cols.len());
        }
        Self {
            n,
            offset: model.offset(),
            linear,
            row_start,
            cols,
            vals,
            integral: model.is_integral(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn linear(&self, i: usize) -> f64 {
        self.linear[i]
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// `a_i + sum_j b_ij x_j` for the current assignment.
    pub fn local_field(&self, i: usize, x: &SpinVector) -> f64 {
        let mut f = self.linear[i];
        for (j, c) in self.neighbors(i) {
            if x.get(j) {
                f += c;
            }
        }
        f
    }

    /// Energy change from flipping variable `i`.
    #[inline]
    pub fn flip_delta(&self, i: usize, x: &SpinVector) -> f64 {
        let f = self.local_field(i, x);
        if x.get(i) {
            -f
        } else {
            f
        }
    }

    pub fn energy(&self, x: &SpinVector) -> f64 {
        let mut e = self.offset;
        for i in 0..self.n {
            if x.get(i) {
                e += self.linear[i];
                for (j, c) in self.neighbors(i) {
                    if j > i && x.get(j) {
                        e += c;
                    }
                }
            }
        }
        e
    }

    /// Largest possible `|dE|` of a single flip of `i`.
    pub fn flip_bound(&self, i: usize) -> f64 {
        let pos: f64 = self.neighbors(i).map(|(_, c)| c.max(0.0)).sum();
        let neg: f64 = self.neighbors(i).map(|(_, c)| c.min(0.0)).sum();
        (self.linear[i] + pos).abs().max((self.linear[i] + neg).abs())
    }
}

// JSON interchange ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct QuboJson {
    n_vars: usize,
    linear: Vec<(usize, f64)>,
    quadratic: Vec<(usize, usize, f64)>,
    offset: f64,
    #[serde(default)]
    labels: Labels,
}

#[derive(Serialize, Deserialize)]
struct IsingJson {
    n_spins: usize,
    h: Vec<(usize, f64)>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
    offset: f64,
    #[serde(default)]
    labels: Labels,
}

impl Serialize for QuboModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuboJson {
            n_vars: self.n_vars(),
            linear: self.linear().iter().map(|(&i, &c)| (i, c)).collect(),
            quadratic: self.quadratic().iter().map(|(&(i, j), &c)| (i, j, c)).collect(),
            offset: self.offset(),
            labels: self.labels().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuboModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = QuboJson::deserialize(d)?;
        QuboModel::from_terms(j.n_vars, j.linear, j.quadratic, j.offset, j.labels).map_err(serde::de::Error::custom)
    }
}

impl Serialize for IsingModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IsingJson {
            n_spins: self.n_spins(),
            h: self.fields().iter().map(|(&i, &c)| (i, c)).collect(),
            j: self.couplings().iter().map(|(&(i, j), &c)| (i, j, c)).collect(),
            offset: self.offset(),
            labels: self.labels().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IsingModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = IsingJson::deserialize(d)?;
        IsingModel::from_terms(j.n_spins, j.h, j.j, j.offset, j.labels).map_err(serde::de::Error::custom)
    }
}

/// Either model form, as read from a JSON file. Ising JSON is recognized
/// by its `n_spins` key.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnyModel {
    Qubo(QuboModel),
    Ising(IsingModel),
}

impl AnyModel {
    pub fn n_vars(&self) -> usize {
        match self {
            AnyModel::Qubo(m) => m.n_vars(),
            AnyModel::Ising(m) => m.n_spins(),
        }
    }

    /// QUBO view with identical energies under `s = 2x - 1`.
    pub fn to_qubo(&self) -> QuboModel {
        match self {
            AnyModel::Qubo(m) => m.clone(),
            AnyModel::Ising(m) => m.to_qubo(),
        }
    }

    pub fn energy(&self, x: &SpinVector) -> Result<f64> {
        match self {
            AnyModel::Qubo(m) => m.energy(x),
            AnyModel::Ising(m) => m.energy(x),
        }
    }

    pub fn native_kind(&self) -> SpinKind {
        match self {
            AnyModel::Qubo(_) => SpinKind::Binary,
            AnyModel::Ising(_) => SpinKind::Spin,
        }
    }
}

impl<'de> Deserialize<'de> for AnyModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let value = serde_json::Value::deserialize(d)?;
        if value.get("n_spins").is_some() {
            IsingModel::deserialize(value)
                .map(AnyModel::Ising)
                .map_err(D::Error::custom)
        } else {
            QuboModel::deserialize(value)
                .map(AnyModel::Qubo)
                .map_err(D::Error::custom)
        }
    }
}

impl From<QuboModel> for AnyModel {
    fn from(m: QuboModel) -> Self {
        AnyModel::Qubo(m)
    }
}

impl From<IsingModel> for AnyModel {
    fn from(m: IsingModel) -> Self {
        AnyModel::Ising(m)
    }
}
