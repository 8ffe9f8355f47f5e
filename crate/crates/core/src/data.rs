//! Dataset representation, the seeding contract, and class-level helpers.
//!
//! Labels follow one convention everywhere: `0` is the majority class and `1`
//! the minority class.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, Error, Result};

pub const MAJORITY: u8 = 0;
pub const MINORITY: u8 = 1;

/// Dense row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<u8>,
}

impl Dataset {
    /// Builds a dataset from row-major features. Rejects ragged input,
    /// non-binary labels and non-finite values.
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("feature dimension must be at least 1"));
        }
        if features.len() != dim * labels.len() {
            return Err(invalid(format!(
                "{} feature values do not fill {} rows of dimension {}",
                features.len(),
                labels.len(),
                dim
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(invalid(format!("label {l} is not 0 or 1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(invalid("feature values must be finite"));
        }
        Ok(Self { features, dim, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows have differing lengths"));
        }
        Self::new(rows.concat(), dim, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    /// Indices of rows carrying `label`, ascending.
    pub fn indices_of(&self, label: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == label).then_some(i))
            .collect()
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset { features, dim: self.dim, labels }
    }

    /// Copy of `self` with extra rows of a single label appended.
    pub(crate) fn with_appended(&self, rows: &[f64], label: u8) -> Dataset {
        debug_assert_eq!(rows.len() % self.dim, 0);
        let mut out = self.clone();
        out.features.extend_from_slice(rows);
        out.labels.extend(std::iter::repeat_n(label, rows.len() / self.dim));
        out
    }

    pub(crate) fn require_both_classes(&self) -> Result<ClassCounts> {
        let counts = class_counts(self);
        if counts.n_majority == 0 || counts.n_minority == 0 {
            return Err(degenerate(format!(
                "both classes required, found {} majority and {} minority rows",
                counts.n_majority, counts.n_minority
            )));
        }
        Ok(counts)
    }

    /// Writes the dataset CSV: header `f0,...,f{d-1},label`, `\n` line endings,
    /// shortest round-tripping decimal text for every value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = String::new();
        for j in 0..self.dim {
            line.push_str(&format!("f{j},"));
        }
        line.push_str("label\n");
        out.write_all(line.as_bytes())?;
        for (row, &label) in self.rows().zip(&self.labels) {
            line.clear();
            for v in row {
                line.push_str(&format!("{v},"));
            }
            line.push_str(if label == MINORITY { "1\n" } else { "0\n" });
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .clone();
        let ncols = headers.len();
        if ncols < 2 || &headers[ncols - 1] != "label" {
            return Err(Error::Parse("last header column must be `label`".into()));
        }
        for (j, h) in headers.iter().take(ncols - 1).enumerate() {
            if h != format!("f{j}") {
                return Err(Error::Parse(format!("header column {j} is `{h}`, expected `f{j}`")));
            }
        }
        let dim = ncols - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (lineno, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.len() != ncols {
                return Err(Error::Parse(format!("row {} has {} fields", lineno + 1, record.len())));
            }
            for field in record.iter().take(dim) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number `{field}`", lineno + 1)))?;
                features.push(v);
            }
            labels.push(match record[dim].trim() {
                "0" => MAJORITY,
                "1" => MINORITY,
                other => {
                    return Err(Error::Parse(format!("row {}: label `{other}`", lineno + 1)))
                }
            });
        }
        Dataset::new(features, dim, labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Root seed plus the substream it addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    /// ChaCha8 keyed by `seed`, positioned on stream `stream_id`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    pub fn derive(&self, task_label: &str) -> RngSeed {
        derive_stream(*self, task_label)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across platforms and builds.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Child stream for a named task. Derivations chain: the parent's stream id
/// is folded in, so `derive(derive(s, "a"), "b")` differs from
/// `derive(derive(s, "b"), "a")`.
pub fn derive_stream(seed: RngSeed, task_label: &str) -> RngSeed {
    let parent = splitmix64(seed.stream_id);
    RngSeed {
        seed: seed.seed,
        stream_id: splitmix64(seed.seed ^ parent ^ fnv1a(task_label)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub n_majority: usize,
    pub n_minority: usize,
}

pub fn class_counts(data: &Dataset) -> ClassCounts {
    let n_minority = data.labels.iter().filter(|&&l| l == MINORITY).count();
    ClassCounts { n_majority: data.len() - n_minority, n_minority }
}

pub fn imbalance_ratio(counts: ClassCounts) -> Result<f64> {
    if counts.n_minority == 0 {
        return Err(degenerate("imbalance ratio undefined without minority rows"));
    }
    Ok(counts.n_majority as f64 / counts.n_minority as f64)
}

/// Keeps every row of the other class and a uniform sample without
/// replacement of `keep` rows of `which_class`. Original row order is kept.
pub fn subsample_class(data: &Dataset, which_class: u8, keep: usize, rng: RngSeed) -> Result<Dataset> {
    let mut members = data.indices_of(which_class);
    if keep == 0 || keep > members.len() {
        return Err(invalid(format!(
            "cannot keep {keep} of {} rows of class {which_class}",
            members.len()
        )));
    }
    members.shuffle(&mut rng.rng());
    let mut chosen = vec![false; data.len()];
    for &i in &members[..keep] {
        chosen[i] = true;
    }
    let rows: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] != which_class || chosen[i])
        .collect();
    Ok(data.select(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn counted(n_maj: usize, n_min: usize) -> Dataset {
        let n = n_maj + n_min;
        let features = (0..n).map(|i| i as f64).collect();
        let labels = (0..n).map(|i| u8::from(i >= n_maj)).collect();
        Dataset::new(features, 1, labels).unwrap()
    }

    #[test]
    fn counts_and_ratio() {
        let d = counted(900, 100);
        let c = class_counts(&d);
        assert_eq!(c, ClassCounts { n_majority: 900, n_minority: 100 });
        assert_eq!(imbalance_ratio(c).unwrap(), 9.0);

        let all_min = Dataset::new(vec![0.0; 10], 1, vec![1; 10]).unwrap();
        assert_eq!(class_counts(&all_min), ClassCounts { n_majority: 0, n_minority: 10 });

        let mammo = class_counts(&counted(11183 - 260, 260));
        assert_eq!(mammo, ClassCounts { n_majority: 10923, n_minority: 260 });
        assert!((imbalance_ratio(mammo).unwrap() - 42.01).abs() <= 0.01);

        let bal = ClassCounts { n_majority: 50, n_minority: 50 };
        assert_eq!(imbalance_ratio(bal).unwrap(), 1.0);
        assert!(matches!(
            imbalance_ratio(ClassCounts { n_majority: 5, n_minority: 0 }),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, vec![0, 1]).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], 1, vec![0, 2]).is_err());
        assert!(Dataset::new(vec![f64::NAN, 2.0], 1, vec![0, 1]).is_err());
    }

    #[test]
    fn subsample_minority() {
        let d = counted(900, 100);
        let s = subsample_class(&d, MINORITY, 45, RngSeed::new(3)).unwrap();
        let c = class_counts(&s);
        assert_eq!((c.n_majority, c.n_minority), (900, 45));
        assert_eq!(imbalance_ratio(c).unwrap(), 20.0);

        let full = subsample_class(&d, MINORITY, 100, RngSeed::new(3)).unwrap();
        assert_eq!(full, d);

        assert!(subsample_class(&d, MINORITY, 101, RngSeed::new(3)).is_err());
        assert!(subsample_class(&d, MINORITY, 0, RngSeed::new(3)).is_err());
    }

    #[test]
    fn different_streams_pick_different_rows() {
        let d = counted(900, 100);
        let root = RngSeed::new(11);
        let a = subsample_class(&d, MINORITY, 45, root.derive("a")).unwrap();
        let b = subsample_class(&d, MINORITY, 45, root.derive("b")).unwrap();
        assert_eq!(class_counts(&a), class_counts(&b));
        assert_ne!(a.features(), b.features());
    }

    #[test]
    fn derived_streams() {
        let s = RngSeed::new(17);
        assert_eq!(derive_stream(s, "fold0"), derive_stream(s, "fold0"));
        let first8 = |seed: RngSeed| -> Vec<u64> {
            let mut rng = seed.rng();
            (0..8).map(|_| rng.random()).collect()
        };
        assert_ne!(first8(s.derive("fold0")), first8(s.derive("fold1")));
        let zero = derive_stream(RngSeed::new(0), "");
        assert_eq!(first8(zero), first8(derive_stream(RngSeed::new(0), "")));
    }

    #[test]
    fn csv_layout() {
        let d = Dataset::from_rows(&[vec![0.1, -2.0], vec![1e-7, 3.5]], vec![0, 1]).unwrap();
        let text = d.to_csv_string();
        assert_eq!(text, "f0,f1,label\n0.1,-2,0\n0.0000001,3.5,1\n");
        let back = Dataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, d);
        assert!(Dataset::read_csv("a,label\n1,0\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("f0,label\n1,2\n".as_bytes()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn csv_round_trips_bits(values in proptest::collection::vec(-1e12f64..1e12, 2..40)) {
                let n = values.len() / 2;
                let labels = (0..n).map(|i| (i % 2) as u8).collect();
                let d = Dataset::new(values[..2 * n].to_vec(), 2, labels).unwrap();
                let back = Dataset::read_csv(d.to_csv_string().as_bytes()).unwrap();
                prop_assert_eq!(back, d);
            }

            #[test]
            fn subsample_never_fabricates(n_maj in 1usize..60, n_min in 1usize..30, seed: u64, frac in 0.0f64..1.0) {
                let d = counted(n_maj, n_min);
                let keep = 1 + ((n_min - 1) as f64 * frac) as usize;
                let s = subsample_class(&d, MINORITY, keep, RngSeed::new(seed)).unwrap();
                for row in s.rows() {
                    prop_assert!(d.rows().any(|r| r == row));
                }
                let c = class_counts(&s);
                prop_assert_eq!(imbalance_ratio(c).unwrap(), n_maj as f64 / keep as f64);
            }

            #[test]
            fn ratio_invariant_under_permutation(n_maj in 0usize..50, n_min in 1usize..50, seed: u64) {
                let d = counted(n_maj, n_min);
                let mut order: Vec<usize> = (0..d.len()).collect();
                order.shuffle(&mut RngSeed::new(seed).rng());
                let p = d.select(&order);
                prop_assert_eq!(
                    imbalance_ratio(class_counts(&p)).unwrap(),
                    imbalance_ratio(class_counts(&d)).unwrap()
                );
            }
        }
    }
}
