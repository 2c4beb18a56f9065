//! Generators for SEN and SEN+ dependability models.
//!
//! Every generator builds the fault tree first; the block diagram of the
//! same spec is its image under [`dft_to_drbd`](crate::model::dft_to_drbd).
//!
//! Component ids are allocated from 0 upward in tree order, so the spared
//! input switch is always id 0 and the ids of a model are exactly
//! `0..total_components`. In the SEN+ network model the AND pairs come last:
//! pair `j` holds ids `2j` and `2j + 1`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dist::{DormancyFactor, FailureDistribution};
use crate::error::{Error, Result};
use crate::eval::WspParams;
use crate::model::{dft_to_drbd_unchecked, DftNode, Formalism, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    #[serde(rename = "sen")]
    Sen,
    #[serde(rename = "sen+")]
    SenPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    /// One source-destination connection.
    Terminal,
    /// One source to every destination.
    Broadcast,
    /// Every connection.
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpareConfig {
    None,
    /// The spares of the published models: the input switch, plus the
    /// output switch for the SEN+ terminal connection.
    #[serde(rename = "paper")]
    PaperDefault,
    /// A spare behind every input-stage switch (network analysis only).
    #[serde(rename = "all")]
    AllInputs,
}

macro_rules! parse_enum {
    ($ty:ty, $what:literal, $($text:literal => $value:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($value),)+
                    other => Err(Error::InvalidSpec(format!(concat!("unknown ", $what, " '{}'"), other))),
                }
            }
        }
    };
}

parse_enum!(Variant, "variant", "sen" => Variant::Sen, "sen+" => Variant::SenPlus, "senplus" => Variant::SenPlus);
parse_enum!(Analysis, "analysis", "terminal" => Analysis::Terminal, "broadcast" => Analysis::Broadcast,
    "network" => Analysis::Network);
parse_enum!(SpareConfig, "spare configuration", "none" => SpareConfig::None, "paper" => SpareConfig::PaperDefault,
    "all" => SpareConfig::AllInputs, "all-inputs" => SpareConfig::AllInputs);
parse_enum!(Formalism, "formalism", "dft" => Formalism::Dft, "drbd" => Formalism::Drbd);

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Sen => "SEN",
            Variant::SenPlus => "SEN+",
        })
    }
}

/// Everything needed to generate one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SenModelSpec {
    /// Number of network inputs (and outputs); a power of two, at least 4.
    pub n: u32,
    pub variant: Variant,
    pub analysis: Analysis,
    pub formalism: Formalism,
    pub spares: SpareConfig,
    /// Failure rate of every switching element, per hour.
    pub rate: f64,
    pub dormancy: DormancyFactor,
}

impl SenModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::InvalidSpec("n must be a power of two".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidSpec("n must be at least 4".into()));
        }
        if self.variant == Variant::SenPlus && self.analysis == Analysis::Network && self.n < 8 {
            return Err(Error::InvalidSpec(
                "the SEN+ network model needs n >= 8 (its middle OR gates are empty for n = 4)".into(),
            ));
        }
        if self.spares == SpareConfig::AllInputs && self.analysis != Analysis::Network {
            return Err(Error::InvalidSpec(
                "spares on all inputs are only defined for the network analysis".into(),
            ));
        }
        FailureDistribution::exponential(self.rate)?;
        Ok(())
    }

    fn stages(&self) -> u64 {
        u64::from(self.n.trailing_zeros())
    }

    /// True when the structure is a generalization of counts the published
    /// models only give for one network size.
    pub fn extrapolated(&self) -> bool {
        self.variant == Variant::SenPlus && self.analysis == Analysis::Network && self.n != 128
    }
}

/// Structural counts of a generated model. Counts that do not apply to an
/// analysis are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StructureCounts {
    /// Switches on one source-destination path.
    pub path_length: Option<u64>,
    /// Inputs of each OR gate below the top-level AND (one alternative path).
    pub first_level_or_inputs: Option<u64>,
    /// Inputs of the top OR gate once nested OR gates are merged into it.
    pub top_or_inputs: Option<u64>,
    /// Number of two-input AND gates (SEN+ network).
    pub and_gate_count: Option<u64>,
    /// Inputs of each OR gate under the AND of ORs (SEN+ network).
    pub network_or_inputs: Option<u64>,
    /// Destination-side switches that must all work.
    pub output_series_length: Option<u64>,
    /// Switches backed by a warm spare.
    pub spared_count: u64,
    /// Switching elements in the model; a spared switch counts once.
    pub total_components: u64,
}

/// Structure counts implied by `spec`, computed from closed formulas (not by
/// inspecting a generated tree).
pub fn sen_counts(spec: &SenModelSpec) -> Result<StructureCounts> {
    spec.validate()?;
    let n = u64::from(spec.n);
    let k = spec.stages();
    let spared = |paper: u64| match spec.spares {
        SpareConfig::None => 0,
        SpareConfig::PaperDefault => paper,
        SpareConfig::AllInputs => n / 2,
    };
    let counts = match (spec.variant, spec.analysis) {
        (Variant::Sen, Analysis::Terminal) => StructureCounts {
            path_length: Some(k),
            top_or_inputs: Some(k),
            spared_count: spared(1),
            total_components: k,
            ..Default::default()
        },
        (Variant::Sen, Analysis::Broadcast) => {
            // sum over stages of n / 2^i
            let total = (1..=k).map(|i| n >> i).sum::<u64>();
            StructureCounts {
                top_or_inputs: Some(total),
                spared_count: spared(1),
                total_components: total,
                ..Default::default()
            }
        }
        (Variant::Sen, Analysis::Network) => StructureCounts {
            top_or_inputs: Some(n / 2 * k),
            spared_count: spared(1),
            total_components: n / 2 * k,
            ..Default::default()
        },
        (Variant::SenPlus, Analysis::Terminal) => StructureCounts {
            path_length: Some(k + 1),
            first_level_or_inputs: Some(k - 1),
            top_or_inputs: Some(3),
            spared_count: spared(2),
            total_components: 2 + 2 * (k - 1),
            ..Default::default()
        },
        (Variant::SenPlus, Analysis::Broadcast) => StructureCounts {
            first_level_or_inputs: Some(n / 2 - 1),
            top_or_inputs: Some(n / 2 + 2),
            output_series_length: Some(n / 2),
            spared_count: spared(1),
            total_components: 1 + 2 * (n / 2 - 1) + n / 2,
            ..Default::default()
        },
        (Variant::SenPlus, Analysis::Network) => {
            let middle = (k - 2) * n / 4;
            StructureCounts {
                first_level_or_inputs: Some(middle),
                // input stage, AND of ORs, outputs and every AND pair
                top_or_inputs: Some(n / 2 + 1 + n / 2 + n / 4),
                and_gate_count: Some(n / 4),
                network_or_inputs: Some(middle),
                output_series_length: Some(n / 2),
                spared_count: spared(1),
                total_components: n / 2 * (k + 1),
                ..Default::default()
            }
        }
    };
    Ok(counts)
}

struct Builder {
    next_id: u64,
    rate: FailureDistribution,
    spare: WspParams,
}

impl Builder {
    fn new(spec: &SenModelSpec) -> Result<Self> {
        let rate = FailureDistribution::exponential(spec.rate)?;
        Ok(Self {
            next_id: 0,
            rate,
            spare: WspParams::with_dormancy(rate, rate, spec.dormancy),
        })
    }

    fn switch(&mut self, spared: bool) -> DftNode {
        let id = self.next_id;
        self.next_id += 1;
        if spared {
            DftNode::wsp(id, self.spare)
        } else {
            DftNode::basic(id, self.rate)
        }
    }

    fn switches(&mut self, count: u64) -> Vec<DftNode> {
        (0..count).map(|_| self.switch(false)).collect()
    }

    fn alternative_paths(&mut self, per_path: u64) -> DftNode {
        let first = DftNode::Or(self.switches(per_path));
        let second = DftNode::Or(self.switches(per_path));
        DftNode::And(vec![first, second])
    }
}

/// Builds the model described by `spec` in the requested formalism.
pub fn build_model(spec: &SenModelSpec) -> Result<Model> {
    let dft = build_dft(spec)?;
    Ok(match spec.formalism {
        Formalism::Dft => Model::Dft(dft),
        Formalism::Drbd => Model::Drbd(dft_to_drbd_unchecked(&dft)),
    })
}

fn build_dft(spec: &SenModelSpec) -> Result<DftNode> {
    spec.validate()?;
    let n = u64::from(spec.n);
    let k = spec.stages();
    let mut b = Builder::new(spec)?;
    let paper = spec.spares != SpareConfig::None;
    let all_inputs = spec.spares == SpareConfig::AllInputs;

    let root = match (spec.variant, spec.analysis) {
        (Variant::Sen, analysis) => {
            let total = match analysis {
                Analysis::Terminal => k,
                Analysis::Broadcast => n - 1,
                Analysis::Network => n / 2 * k,
            };
            let spared = if all_inputs { n / 2 } else { u64::from(paper) };
            DftNode::Or((0..total).map(|i| b.switch(i < spared)).collect())
        }
        (Variant::SenPlus, Analysis::Terminal) => {
            let input = b.switch(paper);
            let paths = b.alternative_paths(k - 1);
            let output = b.switch(paper);
            DftNode::Or(vec![input, paths, output])
        }
        (Variant::SenPlus, Analysis::Broadcast) => {
            let input = b.switch(paper);
            let paths = b.alternative_paths(n / 2 - 1);
            let outputs = DftNode::Or(b.switches(n / 2));
            DftNode::Or(vec![input, paths, outputs])
        }
        (Variant::SenPlus, Analysis::Network) => {
            let input = b.switch(paper);
            let other_inputs = DftNode::Or((1..n / 2).map(|_| b.switch(all_inputs)).collect());
            let paths = b.alternative_paths((k - 2) * n / 4);
            let outputs = DftNode::Or(b.switches(n / 2));
            debug_assert_eq!(b.next_id % 2, 0);
            let mut top = vec![input, other_inputs, paths, outputs];
            for _ in 0..n / 4 {
                top.push(DftNode::And(b.switches(2)));
            }
            DftNode::Or(top)
        }
    };
    Ok(root)
}

/// The 128x128 SEN+ models of the published evaluation: rate 1e-5 per hour,
/// dormancy factor 0.1, input (and for the terminal case output) spares, and
/// spares on all 64 input switches for the network analysis.
pub fn preset_paper_128(analysis: Analysis, formalism: Formalism) -> Result<(SenModelSpec, Model)> {
    let spec = SenModelSpec {
        n: 128,
        variant: Variant::SenPlus,
        analysis,
        formalism,
        spares: if analysis == Analysis::Network {
            SpareConfig::AllInputs
        } else {
            SpareConfig::PaperDefault
        },
        rate: 1e-5,
        dormancy: DormancyFactor::new(0.1)?,
    };
    let model = build_model(&spec)?;
    Ok((spec, model))
}

/// Metadata block stored next to a generated model.
pub fn metadata(spec: &SenModelSpec) -> Result<serde_json::Value> {
    Ok(serde_json::json!({
        "generator": spec,
        "counts": sen_counts(spec)?,
        "extrapolated": spec.extrapolated(),
    }))
}
