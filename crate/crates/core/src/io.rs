//! Instance and output files.
//!
//! Rationals are written as `"a/b"` or integer strings; keys come out
//! sorted so identical inputs give byte-identical files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::chains::{from_sets, Chain, ChainFamily, InstanceParams, SetFamily, VarRatio};
use crate::error::{Error, Result};
use crate::metric::{MetricGenerator, MetricSource, PointIdx, Space};
use crate::scalar::{parse_quotient, Quotient, Scalar};
use crate::tailor::{Case, Certificate, PairRecord, RadiusBounds, SubsetFamily};

/// A space, a chain family on it, and the claimed witness parameters.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    pub space: Space<T>,
    pub chains: ChainFamily,
    pub r: T,
    pub epsilon: Quotient,
    pub s: T,
}

impl<T: Scalar> Instance<T> {
    /// `L` and `N` follow from the chains.
    pub fn params(&self) -> Result<InstanceParams<T>> {
        InstanceParams::new(
            self.r.clone(),
            self.epsilon,
            self.s.clone(),
            1 + self.chains.max_mass(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = parse(text)?;
        let r = file.params.r.scalar()?;
        let s = file.params.s.scalar()?;
        let epsilon = parse_quotient(&file.params.epsilon.text())
            .ok_or_else(|| Error::Malformed(format!("bad epsilon {:?}", file.params.epsilon.text())))?;
        let source = match file.space.metric {
            MetricFile::Matrix { matrix } => MetricSource::Matrix(
                matrix
                    .into_iter()
                    .map(|row| row.iter().map(Num::scalar).collect::<Result<Vec<T>>>())
                    .collect::<Result<_>>()?,
            ),
            MetricFile::Graph { edges } => MetricSource::Graph(
                edges
                    .into_iter()
                    .map(|(a, b, w)| Ok((a, b, w.scalar()?)))
                    .collect::<Result<_>>()?,
            ),
            MetricFile::Generator(g) => MetricSource::Generator(g.into_generator()?),
        };
        let space = Space::build(file.space.points, source)?.with_hints(
            file.unbounded_hints
                .into_iter()
                .map(|h| (h.component_of, h.ray))
                .collect(),
        )?;

        let chains = match (file.chains, file.sets) {
            (Some(chains), None) => {
                let mut map = BTreeMap::new();
                for (x, entries) in chains {
                    let mut chain = Chain::new();
                    for (z, v) in entries {
                        chain.add(space.index_of(&z)?, v);
                    }
                    if map.insert(space.index_of(&x)?, chain).is_some() {
                        return Err(Error::Malformed(format!("duplicate chain for {x}")));
                    }
                }
                ChainFamily::new(space.len(), map)?
            }
            (None, Some(sets)) => {
                let mut map = BTreeMap::new();
                for (x, members) in sets {
                    let set = members
                        .into_iter()
                        .map(|(z, level)| Ok((space.index_of(&z)?, level)))
                        .collect::<Result<BTreeSet<_>>>()?;
                    map.insert(space.index_of(&x)?, set);
                }
                from_sets(space.len(), &SetFamily::new(map))?
            }
            (Some(_), Some(_)) => {
                return Err(Error::Malformed("give either chains or sets, not both".into()))
            }
            (None, None) => return Err(Error::Malformed("instance has neither chains nor sets".into())),
        };

        Ok(Instance {
            space,
            chains,
            r,
            epsilon,
            s,
        })
    }

    pub fn to_json(&self) -> String {
        let space = &self.space;
        let metric = match space.source() {
            MetricSource::Matrix(_) => MetricFile::Matrix {
                matrix: (0..space.len())
                    .map(|x| (0..space.len()).map(|y| Num::of(&space.dist(x, y))).collect())
                    .collect(),
            },
            MetricSource::Graph(edges) => MetricFile::Graph {
                edges: edges
                    .iter()
                    .map(|(a, b, w)| (a.clone(), b.clone(), Num::of(w)))
                    .collect(),
            },
            MetricSource::Generator(g) => MetricFile::Generator(GeneratorFile::of(g)),
        };
        let points = space.ids().to_vec();
        let chains = self
            .chains
            .iter()
            .map(|(x, c)| {
                let entries = c.iter().map(|(&z, v)| (space.id(z).to_string(), v)).collect();
                (space.id(x).to_string(), entries)
            })
            .collect();
        let file = InstanceFile {
            space: SpaceFile { points, metric },
            params: ParamsFile {
                r: Num::of(&self.r),
                epsilon: Num::Str(self.epsilon.to_string()),
                s: Num::of(&self.s),
            },
            chains: Some(chains),
            sets: None,
            unbounded_hints: space
                .hints()
                .iter()
                .map(|h| HintFile {
                    component_of: space.id(h.component_of).to_string(),
                    ray: h.ray.iter().map(|&p| space.id(p).to_string()).collect(),
                })
                .collect(),
        };
        canonical(&file)
    }
}

/// Subsets and certificate as one JSON document.
pub fn output_to_json<T: Scalar>(space: &Space<T>, subsets: &SubsetFamily, certificate: &Certificate<T>) -> String {
    let file = OutputFile {
        subsets: subsets_to_file(space, subsets),
        certificate: certificate_to_file(space, certificate),
    };
    canonical(&file)
}

pub fn parse_output<T: Scalar>(space: &Space<T>, text: &str) -> Result<(SubsetFamily, Certificate<T>)> {
    let file: OutputFile = parse(text)?;
    let subsets = subsets_from_file(space, file.subsets)?;
    let certificate = certificate_from_file(space, file.certificate)?;
    Ok((subsets, certificate))
}

/// Serializes any value with sorted keys and a trailing newline.
pub fn canonical<S: Serialize>(value: &S) -> String {
    let value = serde_json::to_value(value).expect("serializable");
    let mut out = serde_json::to_string_pretty(&value).expect("serializable");
    out.push('\n');
    out
}

fn parse<D: DeserializeOwned>(text: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    space: SpaceFile,
    params: ParamsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chains: Option<BTreeMap<String, BTreeMap<String, u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sets: Option<BTreeMap<String, Vec<(String, u64)>>>,
    #[serde(default)]
    unbounded_hints: Vec<HintFile>,
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    #[serde(default)]
    points: Vec<String>,
    metric: MetricFile,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum MetricFile {
    Matrix { matrix: Vec<Vec<Num>> },
    Graph { edges: Vec<(String, String, Num)> },
    Generator(GeneratorFile),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GeneratorFile {
    Line {
        n: usize,
    },
    Grid {
        width: usize,
        height: usize,
    },
    Paths {
        lengths: Vec<usize>,
        gap: Num,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prefixes: Option<Vec<String>>,
    },
    CayleyCyclic {
        n: usize,
        generators: Vec<i64>,
    },
}

impl GeneratorFile {
    fn of<T: Scalar>(g: &MetricGenerator<T>) -> Self {
        match g {
            MetricGenerator::Line { n } => GeneratorFile::Line { n: *n },
            MetricGenerator::Grid { width, height } => GeneratorFile::Grid {
                width: *width,
                height: *height,
            },
            MetricGenerator::Paths {
                lengths,
                gap,
                prefixes,
            } => GeneratorFile::Paths {
                lengths: lengths.clone(),
                gap: Num::of(gap),
                prefixes: prefixes.clone(),
            },
            MetricGenerator::CayleyCyclic { n, generators } => GeneratorFile::CayleyCyclic {
                n: *n,
                generators: generators.clone(),
            },
        }
    }

    fn into_generator<T: Scalar>(self) -> Result<MetricGenerator<T>> {
        Ok(match self {
            GeneratorFile::Line { n } => MetricGenerator::Line { n },
            GeneratorFile::Grid { width, height } => MetricGenerator::Grid { width, height },
            GeneratorFile::Paths {
                lengths,
                gap,
                prefixes,
            } => MetricGenerator::Paths {
                lengths,
                gap: gap.scalar()?,
                prefixes,
            },
            GeneratorFile::CayleyCyclic { n, generators } => {
                MetricGenerator::CayleyCyclic { n, generators }
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    #[serde(rename = "R")]
    r: Num,
    epsilon: Num,
    #[serde(rename = "S")]
    s: Num,
}

#[derive(Serialize, Deserialize)]
struct HintFile {
    component_of: String,
    ray: Vec<String>,
}

/// A number given either as a JSON integer or as a string.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Str(String),
}

impl Num {
    fn of<T: Scalar>(t: &T) -> Self {
        Num::Str(t.to_string())
    }

    fn text(&self) -> String {
        match self {
            Num::Int(n) => n.to_string(),
            Num::Str(s) => s.clone(),
        }
    }

    fn scalar<T: Scalar>(&self) -> Result<T> {
        let text = self.text();
        T::parse_exact(&text).ok_or_else(|| Error::Malformed(format!("not an exact number: {text:?}")))
    }
}

#[derive(Serialize, Deserialize)]
struct OutputFile {
    subsets: BTreeMap<String, Vec<String>>,
    certificate: CertificateFile,
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    params: CertParamsFile,
    cases: BTreeMap<String, String>,
    radii: BTreeMap<String, String>,
    pairs: Vec<PairFile>,
    worst_ratio: String,
    worst_radius: String,
    bound_radius: String,
    bounds: BoundsFile,
    warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CertParamsFile {
    #[serde(rename = "R")]
    r: String,
    epsilon: String,
    #[serde(rename = "S")]
    s: String,
    #[serde(rename = "L")]
    l: u64,
    #[serde(rename = "N")]
    n: u64,
}

#[derive(Serialize, Deserialize)]
struct BoundsFile {
    flow: String,
    small: String,
    large: String,
    locality: String,
}

#[derive(Serialize, Deserialize)]
struct PairFile {
    x: String,
    y: String,
    input_ratio: String,
    output_ratio: String,
}

fn subsets_to_file<T: Scalar>(space: &Space<T>, subsets: &SubsetFamily) -> BTreeMap<String, Vec<String>> {
    subsets
        .subsets
        .iter()
        .enumerate()
        .map(|(x, set)| {
            let ids = set.iter().map(|&y| space.id(y).to_string()).collect();
            (space.id(x).to_string(), ids)
        })
        .collect()
}

fn subsets_from_file<T: Scalar>(space: &Space<T>, file: BTreeMap<String, Vec<String>>) -> Result<SubsetFamily> {
    let mut subsets = vec![None; space.len()];
    for (x, ids) in file {
        let set = ids
            .iter()
            .map(|id| space.index_of(id))
            .collect::<Result<BTreeSet<_>>>()?;
        subsets[space.index_of(&x)?] = Some(set);
    }
    let subsets = subsets
        .into_iter()
        .enumerate()
        .map(|(x, s)| s.ok_or_else(|| Error::Malformed(format!("no subset given for {}", space.id(x)))))
        .collect::<Result<_>>()?;
    Ok(SubsetFamily { subsets })
}

fn certificate_to_file<T: Scalar>(space: &Space<T>, c: &Certificate<T>) -> CertificateFile {
    let per_point = |f: &dyn Fn(PointIdx) -> String| -> BTreeMap<String, String> {
        (0..space.len()).map(|x| (space.id(x).to_string(), f(x))).collect()
    };
    CertificateFile {
        params: CertParamsFile {
            r: c.params.r.to_string(),
            epsilon: c.params.epsilon.to_string(),
            s: c.params.s.to_string(),
            l: c.params.l,
            n: c.params.n,
        },
        cases: per_point(&|x| c.cases[x].to_string()),
        radii: per_point(&|x| c.radii[x].to_string()),
        pairs: c
            .pairs
            .iter()
            .map(|p| PairFile {
                x: space.id(p.x).to_string(),
                y: space.id(p.y).to_string(),
                input_ratio: p.input_ratio.to_string(),
                output_ratio: p.output_ratio.to_string(),
            })
            .collect(),
        worst_ratio: c.worst_ratio.to_string(),
        worst_radius: c.worst_radius.to_string(),
        bound_radius: c.bound_radius.to_string(),
        bounds: BoundsFile {
            flow: c.bounds.flow.to_string(),
            small: c.bounds.small.to_string(),
            large: c.bounds.large.to_string(),
            locality: c.bounds.locality.to_string(),
        },
        warnings: c.warnings.clone(),
    }
}

fn certificate_from_file<T: Scalar>(space: &Space<T>, file: CertificateFile) -> Result<Certificate<T>> {
    let num = |s: &str| T::parse_exact(s).ok_or_else(|| Error::Malformed(format!("not an exact number: {s:?}")));
    let ratio = |s: &str| VarRatio::parse(s).ok_or_else(|| Error::Malformed(format!("bad ratio {s:?}")));
    fn per_point<T: Scalar, V>(
        space: &Space<T>,
        field: &str,
        map: BTreeMap<String, String>,
        f: impl Fn(&str) -> Result<V>,
    ) -> Result<Vec<V>> {
        let mut out: Vec<Option<V>> = (0..space.len()).map(|_| None).collect();
        for (x, v) in map {
            out[space.index_of(&x)?] = Some(f(&v)?);
        }
        out.into_iter()
            .enumerate()
            .map(|(x, v)| v.ok_or_else(|| Error::Malformed(format!("{field} has no entry for {}", space.id(x)))))
            .collect()
    }

    let params = InstanceParams {
        r: num(&file.params.r)?,
        epsilon: parse_quotient(&file.params.epsilon)
            .ok_or_else(|| Error::Malformed(format!("bad epsilon {:?}", file.params.epsilon)))?,
        s: num(&file.params.s)?,
        l: file.params.l,
        n: file.params.n,
    };
    let cases = per_point(space, "cases", file.cases, |s| {
        Case::parse(s).ok_or_else(|| Error::Malformed(format!("bad case label {s:?}")))
    })?;
    let radii = per_point(space, "radii", file.radii, num)?;
    let pairs = file
        .pairs
        .into_iter()
        .map(|p| {
            Ok(PairRecord {
                x: space.index_of(&p.x)?,
                y: space.index_of(&p.y)?,
                input_ratio: ratio(&p.input_ratio)?,
                output_ratio: ratio(&p.output_ratio)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Certificate {
        params,
        cases,
        radii,
        pairs,
        worst_ratio: ratio(&file.worst_ratio)?,
        worst_radius: num(&file.worst_radius)?,
        bound_radius: num(&file.bound_radius)?,
        bounds: RadiusBounds {
            flow: num(&file.bounds.flow)?,
            small: num(&file.bounds.small)?,
            large: num(&file.bounds.large)?,
            locality: num(&file.bounds.locality)?,
        },
        warnings: file.warnings,
    })
}
