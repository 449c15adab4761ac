//! Binary-input DMCs, symmetric channel pairs, decoding metrics, and the
//! decision-preserving output reductions used throughout the toolkit.
//!
//! A channel is a 2xL row-stochastic matrix. A symmetric pair (W, V) shares
//! one involutive output permutation `pi` with W(y|0) = W(pi(y)|1) and the
//! same for V. Capacity computations expect pairs in canonical form: `pi` is
//! the index reversal y -> L-1-y, with any fixed points sitting in a
//! contiguous center block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance on the decision statistic used when grouping outputs.
pub const MERGE_TOL: f64 = 1e-10;

/// A binary-input DMC over an explicit output alphabet of size L.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    probs: [Vec<f64>; 2],
}

impl Channel {
    /// Builds a channel from its two transition rows, checking row
    /// stochasticity and nonnegativity.
    pub fn new(row0: Vec<f64>, row1: Vec<f64>) -> Result<Self> {
        if row0.is_empty() || row0.len() != row1.len() {
            return Err(Error::Validation(format!(
                "rows must be nonempty and equal length, got {} and {}",
                row0.len(),
                row1.len()
            )));
        }
        let ch = Self { probs: [row0, row1] };
        ch.check()?;
        Ok(ch)
    }

    pub(crate) fn new_unchecked(row0: Vec<f64>, row1: Vec<f64>) -> Self {
        Self { probs: [row0, row1] }
    }

    fn check(&self) -> Result<()> {
        for (x, row) in self.probs.iter().enumerate() {
            if let Some((y, &p)) = row.iter().enumerate().find(|(_, &p)| !(p >= 0.0)) {
                return Err(Error::Validation(format!(
                    "negative or NaN probability {p} at row {x}, column {y}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Validation(format!(
                    "row {x} sums to {sum}, expected 1 within {ROW_SUM_TOL}"
                )));
            }
        }
        Ok(())
    }

    /// A binary symmetric channel with the given crossover probability.
    pub fn bsc(crossover: f64) -> Self {
        Self::new_unchecked(vec![1.0 - crossover, crossover], vec![crossover, 1.0 - crossover])
    }

    pub fn num_outputs(&self) -> usize {
        self.probs[0].len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x]
    }
}

/// A (W, V) pair symmetrized by a shared involutive output permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPair {
    pub w: Channel,
    pub v: Channel,
    pub pi: Vec<usize>,
}

impl SymmetricPair {
    pub fn new(w: Channel, v: Channel, pi: Vec<usize>) -> Result<Self> {
        let pair = Self { w, v, pi };
        let report = validate_pair(&pair);
        if report.is_valid() {
            Ok(pair)
        } else {
            Err(Error::Validation(report.to_string()))
        }
    }

    /// A pair of BSCs sharing the swap permutation on {0, 1}.
    pub fn bsc_pair(eps_w: f64, eps_v: f64) -> Self {
        Self {
            w: Channel::bsc(eps_w),
            v: Channel::bsc(eps_v),
            pi: vec![1, 0],
        }
    }

    pub fn num_outputs(&self) -> usize {
        self.w.num_outputs()
    }

    /// True when `pi` is the reversal permutation, allowing a contiguous
    /// center block of fixed points. Capacity routines require this layout.
    pub fn is_canonical(&self) -> bool {
        let l = self.num_outputs();
        let mut lo = 0usize;
        let mut hi = l;
        // Walk inward pairing y <-> L-1-y; the remaining middle must be all
        // fixed points.
        while lo + 1 < hi {
            if self.pi[lo] == hi - 1 && self.pi[hi - 1] == lo {
                lo += 1;
                hi -= 1;
            } else {
                break;
            }
        }
        (lo..hi).all(|y| self.pi[y] == y)
    }
}

/// A distribution on the binary input alphabet, held as P(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDistribution(f64);

impl InputDistribution {
    pub fn new(p0: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p0) {
            Ok(Self(p0))
        } else {
            Err(Error::Validation(format!("p0 = {p0} outside [0, 1]")))
        }
    }

    pub fn uniform() -> Self {
        Self(0.5)
    }

    pub fn p0(&self) -> f64 {
        self.0
    }

    pub fn p1(&self) -> f64 {
        1.0 - self.0
    }

    pub fn prob(&self, x: usize) -> f64 {
        if x == 0 {
            self.0
        } else {
            1.0 - self.0
        }
    }
}

/// Outcome of `validate_pair`: a list of violated invariants.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

/// Checks every SymmetricPair invariant and reports each violation with the
/// offending index.
pub fn validate_pair(pair: &SymmetricPair) -> ValidationReport {
    let mut report = ValidationReport::default();
    let l = pair.w.num_outputs();
    if pair.v.num_outputs() != l {
        report.violations.push(format!(
            "alphabet mismatch: W has {l} outputs, V has {}",
            pair.v.num_outputs()
        ));
        return report;
    }
    if pair.pi.len() != l {
        report
            .violations
            .push(format!("pi has length {}, expected {l}", pair.pi.len()));
        return report;
    }
    for (name, ch) in [("W", &pair.w), ("V", &pair.v)] {
        for x in 0..2 {
            if let Some((y, &p)) = ch.row(x).iter().enumerate().find(|(_, &p)| !(p >= 0.0)) {
                report
                    .violations
                    .push(format!("{name} row {x} has invalid entry {p} at column {y}"));
            }
            let sum: f64 = ch.row(x).iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                report
                    .violations
                    .push(format!("{name} row {x} sums to {sum}"));
            }
        }
    }
    for y in 0..l {
        if pair.pi[y] >= l {
            report.violations.push(format!("pi({y}) = {} out of range", pair.pi[y]));
            return report;
        }
    }
    for y in 0..l {
        if pair.pi[pair.pi[y]] != y {
            report
                .violations
                .push(format!("pi is not an involution at index {y}"));
        }
    }
    if report.violations.iter().any(|v| v.contains("involution")) {
        return report;
    }
    for (name, ch) in [("W", &pair.w), ("V", &pair.v)] {
        for y in 0..l {
            let a = ch.prob(0, y);
            let b = ch.prob(1, pair.pi[y]);
            if (a - b).abs() > SYMMETRY_TOL {
                report.violations.push(format!(
                    "{name} not symmetrized by pi at output {y}: {a} vs {b}"
                ));
            }
        }
    }
    report
}

/// An additive single-letter metric d(x, y); entries may be +infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingMetric {
    d: [Vec<f64>; 2],
}

impl DecodingMetric {
    pub fn new(row0: Vec<f64>, row1: Vec<f64>) -> Self {
        Self { d: [row0, row1] }
    }

    pub fn num_outputs(&self) -> usize {
        self.d[0].len()
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.d[x][y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.d[x]
    }

    /// True iff d(0, y) = d(1, pi(y)) for all y.
    pub fn is_symmetric(&self, pi: &[usize]) -> bool {
        let l = self.num_outputs();
        pi.len() == l
            && (0..l).all(|y| {
                let a = self.d[0][y];
                let b = self.d[1][pi[y]];
                a == b || (a - b).abs() <= 1e-9
            })
    }
}

/// The ML metric of a channel: d(x, y) = -log2 V(y|x), with +infinity on
/// zero entries.
pub fn metric_from_channel(v: &Channel) -> DecodingMetric {
    let to_metric = |row: &[f64]| -> Vec<f64> {
        row.iter()
            .map(|&p| if p > 0.0 { -p.log2() } else { f64::INFINITY })
            .collect()
    };
    DecodingMetric::new(to_metric(v.row(0)), to_metric(v.row(1)))
}

/// Relabels outputs so that `pi` becomes the index reversal with fixed
/// points centered. Returns the relabeled pair and the map from old to new
/// output indices.
pub fn canonicalize(pair: &SymmetricPair) -> Result<(SymmetricPair, Vec<usize>)> {
    let report = validate_pair(pair);
    if !report.is_valid() {
        return Err(Error::Validation(report.to_string()));
    }
    let l = pair.num_outputs();
    let mut cycles = Vec::new();
    let mut fixed = Vec::new();
    for y in 0..l {
        let z = pair.pi[y];
        if z == y {
            fixed.push(y);
        } else if y < z {
            cycles.push((y, z));
        }
    }
    // Left halves hold the smaller element of each 2-cycle, partners mirror
    // on the right, fixed points fill the middle.
    let mut order = vec![0usize; l];
    for (i, &(a, _)) in cycles.iter().enumerate() {
        order[i] = a;
    }
    for (i, &y) in fixed.iter().enumerate() {
        order[cycles.len() + i] = y;
    }
    for (i, &(_, b)) in cycles.iter().enumerate() {
        order[l - 1 - i] = b;
    }
    let mut old_to_new = vec![0usize; l];
    for (new, &old) in order.iter().enumerate() {
        old_to_new[old] = new;
    }
    let relabel = |ch: &Channel| {
        let mut r0 = vec![0.0; l];
        let mut r1 = vec![0.0; l];
        for old in 0..l {
            r0[old_to_new[old]] = ch.prob(0, old);
            r1[old_to_new[old]] = ch.prob(1, old);
        }
        Channel::new_unchecked(r0, r1)
    };
    let mut pi = vec![0usize; l];
    for old in 0..l {
        pi[old_to_new[old]] = old_to_new[pair.pi[old]];
    }
    let out = SymmetricPair {
        w: relabel(&pair.w),
        v: relabel(&pair.v),
        pi,
    };
    Ok((out, old_to_new))
}

#[derive(Clone, Copy, PartialEq)]
enum DeltaClass {
    Finite(f64),
    PlusInf,
    MinusInf,
    /// Both V entries zero: the decision statistic is undefined. Kept as its
    /// own class so -infinity values of I(W, V) survive the reduction.
    Undefined,
}

/// Groups output symbols by the decision statistic
/// delta(y) = d(0, y) - d(1, y) of the V-metric and sums probabilities
/// within each group. Outputs carrying no probability in either channel are
/// dropped. The result is in canonical (reversal) form.
pub fn merge_outputs(pair: &SymmetricPair) -> Result<SymmetricPair> {
    let (pair, _) = canonicalize(pair)?;
    let l = pair.num_outputs();
    let mut delta = vec![DeltaClass::Undefined; l];
    for y in 0..l {
        let v0 = pair.v.prob(0, y);
        let v1 = pair.v.prob(1, y);
        delta[y] = match (v0 > 0.0, v1 > 0.0) {
            (true, true) => DeltaClass::Finite(v1.log2() - v0.log2()),
            (false, true) => DeltaClass::PlusInf,
            (true, false) => DeltaClass::MinusInf,
            (false, false) => DeltaClass::Undefined,
        };
    }
    // Symmetrize the statistic across pi-orbits so mirror clusters are exact.
    for y in 0..l {
        let z = pair.pi[y];
        if z == y {
            if let DeltaClass::Finite(_) = delta[y] {
                delta[y] = DeltaClass::Finite(0.0);
            }
        } else if y < z {
            if let (DeltaClass::Finite(a), DeltaClass::Finite(b)) = (delta[y], delta[z]) {
                let d = (a - b) / 2.0;
                delta[y] = DeltaClass::Finite(d);
                delta[z] = DeltaClass::Finite(-d);
            }
        }
    }

    let alive = |y: usize| {
        pair.w.prob(0, y) > 0.0
            || pair.w.prob(1, y) > 0.0
            || pair.v.prob(0, y) > 0.0
            || pair.v.prob(1, y) > 0.0
    };

    // Cluster the strictly-positive side, then mirror through pi.
    let mut pos: Vec<(f64, usize)> = Vec::new();
    let mut zero_class = Vec::new();
    let mut undef_class = Vec::new();
    let mut plus_inf_class = Vec::new();
    for y in 0..l {
        if !alive(y) {
            continue;
        }
        match delta[y] {
            DeltaClass::Finite(d) if d > MERGE_TOL => pos.push((d, y)),
            DeltaClass::Finite(d) if d.abs() <= MERGE_TOL => zero_class.push(y),
            DeltaClass::Finite(_) => {}
            DeltaClass::PlusInf => plus_inf_class.push(y),
            DeltaClass::MinusInf => {}
            DeltaClass::Undefined => undef_class.push(y),
        }
    }
    pos.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut pos_classes: Vec<Vec<usize>> = Vec::new();
    for (d, y) in pos {
        match pos_classes.last() {
            Some(last) if {
                let dl = match delta[last[0]] {
                    DeltaClass::Finite(v) => v,
                    _ => unreachable!(),
                };
                (dl - d).abs() <= MERGE_TOL * dl.abs().max(1.0)
            } =>
            {
                pos_classes.last_mut().unwrap().push(y);
            }
            _ => pos_classes.push(vec![y]),
        }
    }
    if !plus_inf_class.is_empty() {
        pos_classes.insert(0, plus_inf_class);
    }

    // Layout: positive classes descending, fixed classes centered, mirrors
    // on the right in reverse order.
    let n_pos = pos_classes.len();
    let mut center: Vec<Vec<usize>> = Vec::new();
    if !zero_class.is_empty() {
        center.push(zero_class);
    }
    if !undef_class.is_empty() {
        center.push(undef_class);
    }
    let l_new = 2 * n_pos + center.len();
    let mut classes: Vec<Vec<usize>> = Vec::with_capacity(l_new);
    classes.extend(pos_classes.iter().cloned());
    classes.extend(center);
    for c in pos_classes.iter().rev() {
        classes.push(c.iter().map(|&y| pair.pi[y]).collect());
    }

    let sum_class = |ch: &Channel, x: usize, class: &[usize]| -> f64 {
        class.iter().map(|&y| ch.prob(x, y)).sum()
    };
    let mut w0 = Vec::with_capacity(l_new);
    let mut v0 = Vec::with_capacity(l_new);
    for class in &classes {
        w0.push(sum_class(&pair.w, 0, class));
        v0.push(sum_class(&pair.v, 0, class));
    }
    // Row 1 mirrors row 0 through the class permutation: reversal outside
    // the center block, identity inside it (center classes are self-paired).
    let mirror_row = |r0: &[f64]| -> Vec<f64> {
        (0..l_new)
            .map(|i| {
                if i < n_pos || i >= l_new - n_pos {
                    r0[l_new - 1 - i]
                } else {
                    r0[i]
                }
            })
            .collect()
    };
    let w1 = mirror_row(&w0);
    let v1 = mirror_row(&v0);
    // Mirror classes sit at reversed positions; center classes are fixed.
    let pi: Vec<usize> = (0..l_new)
        .map(|i| {
            if i < n_pos || i >= l_new - n_pos {
                l_new - 1 - i
            } else {
                i
            }
        })
        .collect();
    SymmetricPair::new(
        Channel::new_unchecked(w0, w1),
        Channel::new_unchecked(v0, v1),
        pi,
    )
}

/// On-disk channel-pair representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFile {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    pub pi: Vec<usize>,
}

impl PairFile {
    pub fn from_pair(pair: &SymmetricPair) -> Self {
        Self {
            l: pair.num_outputs(),
            w: vec![pair.w.row(0).to_vec(), pair.w.row(1).to_vec()],
            v: vec![pair.v.row(0).to_vec(), pair.v.row(1).to_vec()],
            pi: pair.pi.clone(),
        }
    }

    pub fn into_pair(self) -> Result<SymmetricPair> {
        for (name, m) in [("W", &self.w), ("V", &self.v)] {
            if m.len() != 2 {
                return Err(Error::Format(format!("field {name}: expected 2 rows, got {}", m.len())));
            }
            for (x, row) in m.iter().enumerate() {
                if row.len() != self.l {
                    return Err(Error::Format(format!(
                        "field {name} row {x}: expected L={} entries, got {}",
                        self.l,
                        row.len()
                    )));
                }
            }
        }
        if self.pi.len() != self.l {
            return Err(Error::Format(format!(
                "field pi: expected L={} entries, got {}",
                self.l,
                self.pi.len()
            )));
        }
        SymmetricPair::new(
            Channel::new_unchecked(self.w[0].clone(), self.w[1].clone()),
            Channel::new_unchecked(self.v[0].clone(), self.v[1].clone()),
            self.pi,
        )
    }
}

pub fn read_pair(path: &std::path::Path) -> Result<SymmetricPair> {
    let text = std::fs::read_to_string(path)?;
    let file: PairFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_pair()
}

pub fn write_pair(path: &std::path::Path, pair: &SymmetricPair) -> Result<()> {
    let file = PairFile::from_pair(pair);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}
