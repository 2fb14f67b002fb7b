//! Serializable catalog of named dynamical systems.
//!
//! A catalog file is a TOML document listing systems by name with a family
//! tag and parameters. Complex numbers are `[re, im]` pairs, high-precision
//! reals are decimal strings (plain floats are also accepted), torus maps
//! carry integer matrix rows, and a system may attach the integer matrices of
//! its action on cohomology so upper bounds can be reconciled with estimates.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohomology::{growth_profile, CohomologyAction, CohomologyError, HpolBounds};
use crate::intmat::ExactIntMatrix;
use crate::slow::{GapSchedule, SlowError, SlowSkew};
use crate::zoo::{CMat, DynSystem, ProjectiveMap, SkewProduct, TorusAffineMap, ZooError};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse catalog: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize catalog: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("system `{name}`: {source}")]
    BadSystem { name: String, source: ZooError },
    #[error("system `{name}`: {source}")]
    BadSchedule { name: String, source: SlowError },
    #[error("system `{name}`: {source}")]
    BadCohomology {
        name: String,
        source: CohomologyError,
    },
    #[error("cannot parse number `{text}`: {reason}")]
    BadNumber { text: String, reason: String },
    #[error("matrix parse error at line {line}: {reason}")]
    MatrixParse { line: usize, reason: String },
    #[error("system `{name}` has no cohomology data attached")]
    NoCohomology { name: String },
}

/// A real number that may be written as a decimal string to keep full
/// precision in the file, or as a plain TOML float.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Real {
    Num(f64),
    Dec(String),
}

impl Real {
    pub fn value(&self) -> Result<f64, CatalogError> {
        match self {
            Real::Num(x) => Ok(*x),
            Real::Dec(s) => s.trim().parse::<f64>().map_err(|e| CatalogError::BadNumber {
                text: s.clone(),
                reason: e.to_string(),
            }),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Real::Num(x) => format!("{x}"),
            Real::Dec(s) => s.clone(),
        }
    }
}

fn cplx(pair: &[Real; 2]) -> Result<Complex64, CatalogError> {
    Ok(Complex64::new(pair[0].value()?, pair[1].value()?))
}

/// Family tag plus parameters, matching the constructors in [`crate::zoo`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// x -> Ax + b mod 1 on the torus; `a` is rows of an integer matrix.
    Torus {
        a: Vec<Vec<i64>>,
        #[serde(default)]
        b: Vec<Real>,
    },
    /// Projective linear map on P^1 or P^2; `h` is rows of [re, im] pairs.
    Projective { h: Vec<Vec<[Real; 2]>> },
    /// (x, y) -> (x + alpha, y + g(x)) with g from finite Fourier modes.
    Skew {
        alpha: Real,
        modes: Vec<ModeSpec>,
    },
    /// Skew product built from a Liouville gap schedule (one mode per gap).
    SkewSchedule {
        q: Vec<u64>,
        /// log10 of the analyticity radius, as a rational [num, den]
        log10_r: [i64; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSpec {
    pub k: u64,
    pub a: [Real; 2],
}

/// Attached cohomology data: either the full integer action per degree, or
/// just the growth rates when only the bound values matter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CohomologySpec {
    Action {
        k: usize,
        degrees: Vec<DegreeSpec>,
    },
    Rates {
        k: usize,
        s_rates: Vec<usize>,
        b2: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeSpec {
    pub j: usize,
    pub matrix: Vec<Vec<i64>>,
    pub betti: usize,
}

/// Per-system hints for the exponent estimator, so the suite can budget each
/// cell individually.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateHints {
    pub eps: Vec<f64>,
    pub n_schedule: Vec<u64>,
    pub pool: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemEntry {
    pub name: String,
    #[serde(flatten)]
    pub family: FamilySpec,
    /// Exact/classifier prediction for the polynomial entropy, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_hpol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohomology: Option<CohomologySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateHints>,
}

impl SystemEntry {
    /// Instantiates the concrete dynamical system.
    pub fn build(&self) -> Result<DynSystem, CatalogError> {
        let wrap = |source: ZooError| CatalogError::BadSystem {
            name: self.name.clone(),
            source,
        };
        match &self.family {
            FamilySpec::Torus { a, b } => {
                let dim = a.len();
                let flat: Vec<i64> = a.iter().flatten().copied().collect();
                let b: Vec<f64> = b
                    .iter()
                    .map(|r| r.value())
                    .collect::<Result<_, _>>()?;
                let b = if b.is_empty() { vec![0.0; dim] } else { b };
                Ok(DynSystem::Torus(
                    TorusAffineMap::new(dim, flat, b).map_err(wrap)?,
                ))
            }
            FamilySpec::Projective { h } => {
                let size = h.len();
                let mut entries = Vec::with_capacity(size * size);
                for row in h {
                    for pair in row {
                        entries.push(cplx(pair)?);
                    }
                }
                Ok(DynSystem::Projective(
                    ProjectiveMap::new(size - 1, CMat::new(size, entries)).map_err(wrap)?,
                ))
            }
            FamilySpec::Skew { alpha, modes } => {
                let modes: Vec<(u64, Complex64)> = modes
                    .iter()
                    .map(|m| Ok((m.k, cplx(&m.a)?)))
                    .collect::<Result<_, CatalogError>>()?;
                Ok(DynSystem::Skew(
                    SkewProduct::new(alpha.value()?, modes).map_err(wrap)?,
                ))
            }
            FamilySpec::SkewSchedule { .. } => {
                let slow = self.build_slow_skew()?;
                Ok(DynSystem::Skew(slow.to_skew_product()))
            }
        }
    }

    /// For schedule-based entries, the exact Liouville construction.
    pub fn build_slow_skew(&self) -> Result<SlowSkew, CatalogError> {
        match &self.family {
            FamilySpec::SkewSchedule { q, log10_r } => {
                let wrap = |source: SlowError| CatalogError::BadSchedule {
                    name: self.name.clone(),
                    source,
                };
                let schedule = GapSchedule::new(
                    q.clone(),
                    num_rational::BigRational::new(log10_r[0].into(), log10_r[1].into()),
                )
                .map_err(wrap)?;
                SlowSkew::new(schedule, 8).map_err(wrap)
            }
            _ => Err(CatalogError::UnknownSystem(format!(
                "{} is not schedule-based",
                self.name
            ))),
        }
    }

    /// Cohomological upper bounds when data is attached.
    pub fn upper_bounds(&self) -> Result<HpolBounds, CatalogError> {
        let spec = self
            .cohomology
            .as_ref()
            .ok_or_else(|| CatalogError::NoCohomology {
                name: self.name.clone(),
            })?;
        let wrap = |source: CohomologyError| CatalogError::BadCohomology {
            name: self.name.clone(),
            source,
        };
        match spec {
            CohomologySpec::Action { k, degrees } => {
                let action = cohomology_action(*k, degrees).map_err(wrap)?;
                let profile = growth_profile(&action).map_err(wrap)?;
                profile
                    .bounds
                    .ok_or_else(|| wrap(CohomologyError::PositiveEntropy))
            }
            CohomologySpec::Rates { k, s_rates, b2 } => {
                let s: usize = s_rates.iter().sum();
                let s1 = s_rates.first().copied().unwrap_or(0);
                crate::cohomology::hpol_bounds(true, *k, s, s1, *b2).map_err(wrap)
            }
        }
    }

    pub fn cohomology_action(&self) -> Option<Result<CohomologyAction, CatalogError>> {
        match &self.cohomology {
            Some(CohomologySpec::Action { k, degrees }) => Some(
                cohomology_action(*k, degrees).map_err(|source| CatalogError::BadCohomology {
                    name: self.name.clone(),
                    source,
                }),
            ),
            _ => None,
        }
    }
}

fn cohomology_action(
    k: usize,
    degrees: &[DegreeSpec],
) -> Result<CohomologyAction, CohomologyError> {
    let mut actions = Vec::with_capacity(k + 1);
    let mut betti = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let d = degrees
            .iter()
            .find(|d| d.j == j)
            .ok_or(CohomologyError::WrongDegreeCount {
                k,
                expected: k + 1,
                got: degrees.len(),
            })?;
        actions.push(ExactIntMatrix::from_rows(&d.matrix)?);
        betti.push(d.betti);
    }
    CohomologyAction::new(k, actions, betti)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub systems: Vec<SystemEntry>,
}

impl Catalog {
    pub fn from_toml_str(text: &str) -> Result<Self, CatalogError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String, CatalogError> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn get(&self, name: &str) -> Result<&SystemEntry, CatalogError> {
        self.systems
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CatalogError::UnknownSystem(name.to_string()))
    }
}

/// Plain-text matrix input: one row per line, whitespace-separated integers.
pub fn parse_plain_matrix(text: &str) -> Result<ExactIntMatrix, CatalogError> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<i64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<i64>().map_err(|e| CatalogError::MatrixParse {
                    line: i + 1,
                    reason: format!("`{tok}`: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 {
        return Err(CatalogError::MatrixParse {
            line: 0,
            reason: "empty matrix".into(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(CatalogError::MatrixParse {
                line: i + 1,
                reason: format!("expected {dim} entries, got {}", row.len()),
            });
        }
    }
    ExactIntMatrix::from_rows(&rows).map_err(|e| CatalogError::MatrixParse {
        line: 0,
        reason: e.to_string(),
    })
}

fn torus(name: &str, a: Vec<Vec<i64>>, b: Vec<f64>, predicted: f64) -> SystemEntry {
    SystemEntry {
        name: name.into(),
        family: FamilySpec::Torus {
            a,
            b: b.into_iter().map(Real::Num).collect(),
        },
        predicted_hpol: Some(predicted),
        cohomology: None,
        estimate: None,
    }
}

fn projective(name: &str, rows: Vec<Vec<(f64, f64)>>, predicted: f64) -> SystemEntry {
    SystemEntry {
        name: name.into(),
        family: FamilySpec::Projective {
            h: rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|(re, im)| [Real::Num(re), Real::Num(im)])
                        .collect()
                })
                .collect(),
        },
        predicted_hpol: Some(predicted),
        cohomology: None,
        estimate: None,
    }
}

fn hints(eps: &[f64], n_schedule: &[u64], pool: usize) -> Option<EstimateHints> {
    Some(EstimateHints {
        eps: eps.to_vec(),
        n_schedule: n_schedule.to_vec(),
        pool,
    })
}

/// The built-in reconciliation suite: torus shears and rotations, the
/// four-real-dimensional product shear with its degree-wise cohomology
/// action, and representatives of the projective normal-form classes.
pub fn builtin_suite() -> Catalog {
    // H^{1,1} action of the complex product shear (z1, z2) -> (z1 + z2, z2)
    // on a product of two elliptic curves: wedge square of two real Jordan
    // 2-blocks, Jordan type {3, 1, 1, 1}.
    let wedge_action = vec![
        DegreeSpec {
            j: 0,
            matrix: vec![vec![1]],
            betti: 1,
        },
        DegreeSpec {
            j: 1,
            matrix: vec![
                vec![1, 0, 0, 0, 0, 0],
                vec![0, 1, 1, 1, 1, 0],
                vec![0, 0, 1, 0, 1, 0],
                vec![0, 0, 0, 1, 1, 0],
                vec![0, 0, 0, 0, 1, 0],
                vec![0, 0, 0, 0, 0, 1],
            ],
            betti: 6,
        },
        DegreeSpec {
            j: 2,
            matrix: vec![vec![1]],
            betti: 1,
        },
    ];

    let mut shear = torus("shear-t2", vec![vec![1, 1], vec![0, 1]], vec![0.0, 0.0], 1.0);
    shear.cohomology = Some(CohomologySpec::Action {
        k: 1,
        degrees: vec![
            DegreeSpec {
                j: 0,
                matrix: vec![vec![1]],
                betti: 1,
            },
            DegreeSpec {
                j: 1,
                matrix: vec![vec![1]],
                betti: 1,
            },
        ],
    });
    shear.estimate = hints(&[0.05], &[2, 4, 8, 16, 32, 64, 128], 200_000);

    let mut rotation = torus(
        "rotation-t2",
        vec![vec![1, 0], vec![0, 1]],
        vec![0.414_213_562_373_095_1, 0.732_050_807_568_877_2],
        0.0,
    );
    rotation.estimate = hints(&[0.1, 0.05], &[16, 64, 256, 1024], 20_000);

    // (z1, z2) -> (z1 + z2, z2) as a real 4-dimensional torus map
    let mut product_shear = torus(
        "product-shear-t4",
        vec![
            vec![1, 0, 1, 0],
            vec![0, 1, 0, 1],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ],
        vec![0.0; 4],
        2.0,
    );
    product_shear.cohomology = Some(CohomologySpec::Action {
        k: 2,
        degrees: wedge_action,
    });
    product_shear.estimate = hints(&[0.3], &[2, 3, 4, 6, 8, 10], 150_000);

    let mut northsouth = projective(
        "p1-northsouth",
        vec![vec![(2.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]],
        1.0,
    );
    northsouth.estimate = hints(&[0.3], &[8, 16, 32, 64, 128, 256], 200_000);

    let mut p1_rotation = projective(
        "p1-rotation",
        vec![
            vec![(0.921_060_994_002_885, 0.389_418_342_308_650_5), (0.0, 0.0)],
            vec![(0.0, 0.0), (1.0, 0.0)],
        ],
        0.0,
    );
    p1_rotation.estimate = hints(&[0.1, 0.05], &[8, 32, 128, 512], 20_000);

    let mut p1_parabolic = projective(
        "p1-parabolic",
        vec![vec![(1.0, 0.0), (0.35, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]],
        1.0,
    );
    p1_parabolic.estimate = hints(&[0.3], &[8, 16, 32, 64, 128, 256], 200_000);

    let mut p2_isometry = projective(
        "p2-isometry",
        vec![
            vec![(0.921_060_994_002_885, 0.389_418_342_308_650_5), (0.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.696_706_709_347_165_4, 0.717_356_090_899_522_8), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ],
        0.0,
    );
    p2_isometry.estimate = hints(&[0.35, 0.3], &[8, 32, 128, 512], 40_000);

    let mut p2_saddle_diagonal = projective(
        "p2-saddle-diagonal",
        vec![
            vec![(16.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (4.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ],
        2.0,
    );
    p2_saddle_diagonal.estimate = hints(&[0.7], &[8, 12, 16, 24, 32, 48], 1_000_000);

    let mut p2_saddle_jordan = projective(
        "p2-saddle-jordan",
        vec![
            vec![(4.0, 0.0), (4.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (4.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ],
        2.0,
    );
    p2_saddle_jordan.estimate = hints(&[0.7], &[8, 12, 16, 24, 32, 48], 1_000_000);

    let mut p2_mixed_diagonal = projective(
        "p2-mixed-diagonal",
        vec![
            vec![(2.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.696_706_709_347_165_4, 0.717_356_090_899_522_8), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ],
        1.0,
    );
    p2_mixed_diagonal.estimate = hints(&[0.5], &[8, 16, 32, 64, 128], 150_000);

    let mut p2_parabolic_rotation = projective(
        "p2-parabolic-rotation",
        vec![
            vec![(1.0, 0.0), (0.35, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (0.696_706_709_347_165_4, 0.717_356_090_899_522_8)],
        ],
        1.0,
    );
    p2_parabolic_rotation.estimate = hints(&[0.5], &[8, 16, 32, 64, 128], 150_000);

    let mut p2_full_jordan = projective(
        "p2-full-jordan",
        vec![
            vec![(1.0, 0.0), (0.35, 0.0), (0.06, 0.0)],
            vec![(0.0, 0.0), (1.0, 0.0), (0.35, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ],
        1.0,
    );
    p2_full_jordan.estimate = hints(&[0.5], &[6, 8, 12, 16, 24, 32], 400_000);

    // the strict Liouville schedule; predictions are about derivative
    // growth, not a fitted exponent, so the suite leaves it untested
    let liouville = SystemEntry {
        name: "skew-liouville".into(),
        family: FamilySpec::SkewSchedule {
            q: vec![1, 3, 104],
            log10_r: [1, 10],
        },
        predicted_hpol: None,
        cohomology: None,
        estimate: None,
    };

    Catalog {
        systems: vec![
            shear,
            rotation,
            product_shear,
            northsouth,
            p1_rotation,
            p1_parabolic,
            p2_isometry,
            p2_saddle_diagonal,
            p2_saddle_jordan,
            p2_mixed_diagonal,
            p2_parabolic_rotation,
            p2_full_jordan,
            liouville,
        ],
    }
}
