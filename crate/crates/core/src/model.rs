//! DFT and DRBD model trees.
//!
//! A [`DftNode`] describes how a system fails (OR / AND gates over component
//! failure events), a [`DrbdNode`] how it keeps working (series / parallel
//! compositions of blocks). Both carry warm-spare leaves. The two are dual:
//! [`dft_to_drbd`] maps OR to series and AND to parallel, and the DRBD
//! obtained this way works exactly when the DFT top event has not occurred.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::FailureDistribution;
use crate::error::{Error, Result};
use crate::eval::WspParams;

/// Identifier of a basic event, block or spare leaf. Unique within a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComponentId(pub u64);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for ComponentId {
    fn from(id: u64) -> Self {
        ComponentId(id)
    }
}

/// Dynamic fault tree.
#[derive(Debug, Clone, PartialEq)]
pub enum DftNode {
    BasicEvent { id: ComponentId, dist: FailureDistribution },
    /// Fails when any input fails.
    Or(Vec<DftNode>),
    /// Fails when all inputs have failed.
    And(Vec<DftNode>),
    /// Warm spare gate: a main switch backed by one spare.
    Wsp { id: ComponentId, params: WspParams },
}

/// Dynamic reliability block diagram.
#[derive(Debug, Clone, PartialEq)]
pub enum DrbdNode {
    Block { id: ComponentId, dist: FailureDistribution },
    /// Works while every child works.
    Series(Vec<DrbdNode>),
    /// Works while at least one child works.
    Parallel(Vec<DrbdNode>),
    /// Warm spare construct.
    Wsp { id: ComponentId, params: WspParams },
}

impl DftNode {
    pub fn basic(id: u64, dist: FailureDistribution) -> Self {
        DftNode::BasicEvent { id: ComponentId(id), dist }
    }

    pub fn wsp(id: u64, params: WspParams) -> Self {
        DftNode::Wsp { id: ComponentId(id), params }
    }
}

impl DrbdNode {
    pub fn block(id: u64, dist: FailureDistribution) -> Self {
        DrbdNode::Block { id: ComponentId(id), dist }
    }

    pub fn wsp(id: u64, params: WspParams) -> Self {
        DrbdNode::Wsp { id: ComponentId(id), params }
    }
}

/// How a gate combines the failure of its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureLogic {
    /// Fails when any child fails (DFT OR, DRBD series).
    Any,
    /// Fails when every child fails (DFT AND, DRBD parallel).
    All,
}

/// Formalism-independent view of one node, in failure terms.
pub enum Shape<'a, N> {
    Basic(ComponentId, &'a FailureDistribution),
    Spare(ComponentId, &'a WspParams),
    Gate(FailureLogic, &'a [N]),
}

/// Common traversal interface of DFT and DRBD trees.
pub trait StructureTree: Sized {
    fn shape(&self) -> Shape<'_, Self>;

    /// Number of leaves; a warm spare counts as one leaf.
    fn leaf_count(&self) -> usize {
        match self.shape() {
            Shape::Basic(..) | Shape::Spare(..) => 1,
            Shape::Gate(_, children) => children.iter().map(Self::leaf_count).sum(),
        }
    }

    fn depth(&self) -> usize {
        match self.shape() {
            Shape::Basic(..) | Shape::Spare(..) => 1,
            Shape::Gate(_, children) => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }
}

impl StructureTree for DftNode {
    fn shape(&self) -> Shape<'_, Self> {
        match self {
            DftNode::BasicEvent { id, dist } => Shape::Basic(*id, dist),
            DftNode::Wsp { id, params } => Shape::Spare(*id, params),
            DftNode::Or(c) => Shape::Gate(FailureLogic::Any, c),
            DftNode::And(c) => Shape::Gate(FailureLogic::All, c),
        }
    }
}

impl StructureTree for DrbdNode {
    fn shape(&self) -> Shape<'_, Self> {
        match self {
            DrbdNode::Block { id, dist } => Shape::Basic(*id, dist),
            DrbdNode::Wsp { id, params } => Shape::Spare(*id, params),
            DrbdNode::Series(c) => Shape::Gate(FailureLogic::Any, c),
            DrbdNode::Parallel(c) => Shape::Gate(FailureLogic::All, c),
        }
    }
}

/// Trees nested deeper than this are rejected; evaluation is recursive.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DuplicateId,
    EmptyGate,
    DepthExceeded,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::DuplicateId => "duplicate-id",
            Rule::EmptyGate => "empty-gate",
            Rule::DepthExceeded => "depth-exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    /// Offending component id, or the path of the offending gate
    /// (`root/2/0` is the first child of the third child of the root).
    pub location: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule.as_str(), self.location)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn into_result(self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the structural hypotheses every evaluator relies on: leaf ids are
/// pairwise distinct, every gate has at least one input, and nesting is
/// bounded by [`MAX_DEPTH`].
pub fn validate<N: StructureTree>(node: &N) -> ValidationReport {
    let mut seen: BTreeMap<ComponentId, usize> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut path = vec![];
    walk_validate(node, &mut path, &mut seen, &mut violations);
    violations.extend(
        seen.into_iter()
            .filter(|&(_, n)| n > 1)
            .map(|(id, _)| Violation {
                rule: Rule::DuplicateId,
                location: id.to_string(),
            }),
    );
    ValidationReport::from_violations(violations)
}

fn walk_validate<N: StructureTree>(
    node: &N,
    path: &mut Vec<usize>,
    seen: &mut BTreeMap<ComponentId, usize>,
    violations: &mut Vec<Violation>,
) {
    match node.shape() {
        Shape::Basic(id, _) | Shape::Spare(id, _) => *seen.entry(id).or_default() += 1,
        Shape::Gate(_, children) => {
            if path.len() + 1 > MAX_DEPTH {
                violations.push(Violation {
                    rule: Rule::DepthExceeded,
                    location: format_path(path),
                });
                return;
            }
            if children.is_empty() {
                violations.push(Violation {
                    rule: Rule::EmptyGate,
                    location: format_path(path),
                });
            }
            for (i, child) in children.iter().enumerate() {
                path.push(i);
                walk_validate(child, path, seen, violations);
                path.pop();
            }
        }
    }
}

fn format_path(path: &[usize]) -> String {
    let mut s = String::from("root");
    for i in path {
        s.push('/');
        s.push_str(&i.to_string());
    }
    s
}

/// Exact set of leaf ids.
pub fn component_ids<N: StructureTree>(node: &N) -> BTreeSet<ComponentId> {
    fn collect<N: StructureTree>(node: &N, out: &mut BTreeSet<ComponentId>) {
        match node.shape() {
            Shape::Basic(id, _) | Shape::Spare(id, _) => {
                out.insert(id);
            }
            Shape::Gate(_, children) => children.iter().for_each(|c| collect(c, out)),
        }
    }
    let mut out = BTreeSet::new();
    collect(node, &mut out);
    out
}

/// Maps a fault tree onto the block diagram of its complement event.
pub fn dft_to_drbd(node: &DftNode) -> Result<DrbdNode> {
    validate(node).into_result()?;
    Ok(dft_to_drbd_unchecked(node))
}

/// Inverse of [`dft_to_drbd`].
pub fn drbd_to_dft(node: &DrbdNode) -> Result<DftNode> {
    validate(node).into_result()?;
    Ok(drbd_to_dft_unchecked(node))
}

pub(crate) fn dft_to_drbd_unchecked(node: &DftNode) -> DrbdNode {
    match node {
        DftNode::BasicEvent { id, dist } => DrbdNode::Block { id: *id, dist: *dist },
        DftNode::Wsp { id, params } => DrbdNode::Wsp { id: *id, params: *params },
        DftNode::Or(c) => DrbdNode::Series(c.iter().map(dft_to_drbd_unchecked).collect()),
        DftNode::And(c) => DrbdNode::Parallel(c.iter().map(dft_to_drbd_unchecked).collect()),
    }
}

pub(crate) fn drbd_to_dft_unchecked(node: &DrbdNode) -> DftNode {
    match node {
        DrbdNode::Block { id, dist } => DftNode::BasicEvent { id: *id, dist: *dist },
        DrbdNode::Wsp { id, params } => DftNode::Wsp { id: *id, params: *params },
        DrbdNode::Series(c) => DftNode::Or(c.iter().map(drbd_to_dft_unchecked).collect()),
        DrbdNode::Parallel(c) => DftNode::And(c.iter().map(drbd_to_dft_unchecked).collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    Dft,
    Drbd,
}

impl Formalism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Formalism::Dft => "dft",
            Formalism::Drbd => "drbd",
        }
    }
}

/// A tree of either formalism. Mixed trees cannot be represented.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Dft(DftNode),
    Drbd(DrbdNode),
}

impl Model {
    pub fn formalism(&self) -> Formalism {
        match self {
            Model::Dft(_) => Formalism::Dft,
            Model::Drbd(_) => Formalism::Drbd,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Model::Dft(n) => validate(n),
            Model::Drbd(n) => validate(n),
        }
    }

    pub fn component_ids(&self) -> BTreeSet<ComponentId> {
        match self {
            Model::Dft(n) => component_ids(n),
            Model::Drbd(n) => component_ids(n),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Model::Dft(n) => n.leaf_count(),
            Model::Drbd(n) => n.leaf_count(),
        }
    }

    /// The same system in the other formalism.
    pub fn complement(&self) -> Result<Model> {
        Ok(match self {
            Model::Dft(n) => Model::Drbd(dft_to_drbd(n)?),
            Model::Drbd(n) => Model::Dft(drbd_to_dft(n)?),
        })
    }

    /// Serializes into the model file schema. `metadata`, when given, is
    /// stored verbatim under the `"metadata"` key.
    pub fn to_json(&self, metadata: Option<serde_json::Value>) -> Result<String> {
        let file = ModelFile {
            formalism: self.formalism(),
            root: match self {
                Model::Dft(n) => dft_repr(n),
                Model::Drbd(n) => drbd_repr(n),
            },
            metadata,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text)?;
        match file.formalism {
            Formalism::Dft => Ok(Model::Dft(dft_from_repr(&file.root)?)),
            Formalism::Drbd => Ok(Model::Drbd(drbd_from_repr(&file.root)?)),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    formalism: Formalism,
    root: NodeRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct NodeRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spare_active_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spare_dormant_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<NodeRepr>>,
}

impl NodeRepr {
    fn leaf(kind: &str, id: ComponentId, rate: f64) -> Self {
        NodeRepr {
            kind: kind.into(),
            id: Some(id.0),
            rate: Some(rate),
            ..Default::default()
        }
    }

    fn spare(id: ComponentId, params: &WspParams) -> Self {
        NodeRepr {
            kind: "wsp".into(),
            id: Some(id.0),
            rate: Some(params.main().rate()),
            spare_active_rate: Some(params.active().rate()),
            spare_dormant_rate: Some(params.dormant().rate()),
            children: None,
        }
    }

    fn gate(kind: &str, children: Vec<NodeRepr>) -> Self {
        NodeRepr {
            kind: kind.into(),
            children: Some(children),
            ..Default::default()
        }
    }
}

fn dft_repr(node: &DftNode) -> NodeRepr {
    match node {
        DftNode::BasicEvent { id, dist } => NodeRepr::leaf("basic", *id, dist.rate()),
        DftNode::Wsp { id, params } => NodeRepr::spare(*id, params),
        DftNode::Or(c) => NodeRepr::gate("or", c.iter().map(dft_repr).collect()),
        DftNode::And(c) => NodeRepr::gate("and", c.iter().map(dft_repr).collect()),
    }
}

fn drbd_repr(node: &DrbdNode) -> NodeRepr {
    match node {
        DrbdNode::Block { id, dist } => NodeRepr::leaf("block", *id, dist.rate()),
        DrbdNode::Wsp { id, params } => NodeRepr::spare(*id, params),
        DrbdNode::Series(c) => NodeRepr::gate("series", c.iter().map(drbd_repr).collect()),
        DrbdNode::Parallel(c) => NodeRepr::gate("parallel", c.iter().map(drbd_repr).collect()),
    }
}

enum Parsed<'a> {
    Leaf(ComponentId, FailureDistribution),
    Spare(ComponentId, WspParams),
    Gate(&'a [NodeRepr]),
}

fn parse_common<'a>(repr: &'a NodeRepr, leaf_kind: &str, gate_kinds: [&str; 2]) -> Result<Parsed<'a>> {
    let field = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| Error::Schema(format!("'{}' node is missing \"{name}\"", repr.kind)))
    };
    let id = || {
        repr.id
            .map(ComponentId)
            .ok_or_else(|| Error::Schema(format!("'{}' node is missing \"id\"", repr.kind)))
    };
    let kind = repr.kind.as_str();
    if kind == leaf_kind {
        let dist = FailureDistribution::exponential(field("rate", repr.rate)?)?;
        Ok(Parsed::Leaf(id()?, dist))
    } else if kind == "wsp" {
        let params = WspParams::exponential(
            field("rate", repr.rate)?,
            field("spare_active_rate", repr.spare_active_rate)?,
            field("spare_dormant_rate", repr.spare_dormant_rate)?,
        )?;
        Ok(Parsed::Spare(id()?, params))
    } else if gate_kinds.contains(&kind) {
        repr.children
            .as_deref()
            .map(Parsed::Gate)
            .ok_or_else(|| Error::Schema(format!("'{kind}' node is missing \"children\"")))
    } else {
        Err(Error::Schema(format!("unknown node kind '{kind}' for this formalism")))
    }
}

fn dft_from_repr(repr: &NodeRepr) -> Result<DftNode> {
    Ok(match parse_common(repr, "basic", ["or", "and"])? {
        Parsed::Leaf(id, dist) => DftNode::BasicEvent { id, dist },
        Parsed::Spare(id, params) => DftNode::Wsp { id, params },
        Parsed::Gate(children) => {
            let children = children.iter().map(dft_from_repr).collect::<Result<Vec<_>>>()?;
            if repr.kind == "or" {
                DftNode::Or(children)
            } else {
                DftNode::And(children)
            }
        }
    })
}

fn drbd_from_repr(repr: &NodeRepr) -> Result<DrbdNode> {
    Ok(match parse_common(repr, "block", ["series", "parallel"])? {
        Parsed::Leaf(id, dist) => DrbdNode::Block { id, dist },
        Parsed::Spare(id, params) => DrbdNode::Wsp { id, params },
        Parsed::Gate(children) => {
            let children = children.iter().map(drbd_from_repr).collect::<Result<Vec<_>>>()?;
            if repr.kind == "series" {
                DrbdNode::Series(children)
            } else {
                DrbdNode::Parallel(children)
            }
        }
    })
}
