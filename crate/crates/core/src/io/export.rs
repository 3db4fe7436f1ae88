//! Graph export for external viewers, and import for the lossless formats.
//!
//! GraphML and JSON round-trip exactly (node set, edge map, attribute maps).
//! DOT and the CSV edge list are write-only. All output is ordered by node
//! id, then by target id, so repeated exports are byte-identical.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedWeightedGraph, GraphError, NodeId, WeightedEdge};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("unsupported graph format `{0}` (expected graphml, dot, json or csv)")]
    UnsupportedFormat(String),
    #[error("attributes given for node {0}, which is not in the graph")]
    UnknownNode(NodeId),
    #[error("graphml: {0}")]
    Xml(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A node attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Number(f64),
    Text(String),
}

impl From<f64> for AttrValue {
    fn from(v: f64) -> Self {
        AttrValue::Number(v)
    }
}

impl From<&str> for AttrValue {
    fn from(v: &str) -> Self {
        AttrValue::Text(v.to_string())
    }
}

pub type NodeAttributes = BTreeMap<NodeId, BTreeMap<String, AttrValue>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    GraphMl,
    Dot,
    Json,
    Csv,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [
        ExportFormat::GraphMl,
        ExportFormat::Dot,
        ExportFormat::Json,
        ExportFormat::Csv,
    ];

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
        }
    }

    /// Parses a comma-separated list such as `graphml,dot`.
    pub fn parse_list(list: &str) -> Result<Vec<ExportFormat>, ExportError> {
        let mut formats: Vec<ExportFormat> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        formats.sort();
        formats.dedup();
        Ok(formats)
    }
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" | "gv" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(ExportError::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedGraph {
    pub format: ExportFormat,
    pub bytes: Vec<u8>,
}

pub fn export_graph(
    graph: &DirectedWeightedGraph,
    attributes: &NodeAttributes,
    format: ExportFormat,
) -> Result<ExportedGraph, ExportError> {
    if let Some(&stray) = attributes.keys().find(|&&n| !graph.contains(n)) {
        return Err(ExportError::UnknownNode(stray));
    }
    let text = match format {
        ExportFormat::GraphMl => to_graphml(graph, attributes),
        ExportFormat::Dot => to_dot(graph, attributes),
        ExportFormat::Json => to_json(graph, attributes)?,
        ExportFormat::Csv => to_edge_csv(graph),
    };
    Ok(ExportedGraph {
        format,
        bytes: text.into_bytes(),
    })
}

pub fn import_graph(
    bytes: &[u8],
    format: ExportFormat,
) -> Result<(DirectedWeightedGraph, NodeAttributes), ExportError> {
    match format {
        ExportFormat::GraphMl => from_graphml(bytes),
        ExportFormat::Json => from_json(bytes),
        other => Err(ExportError::UnsupportedFormat(format!("{other} (import)"))),
    }
}

/// Arcs to write. An undirected view is written one edge per pair.
fn exported_edges(graph: &DirectedWeightedGraph) -> impl Iterator<Item = WeightedEdge> + '_ {
    let undirected = graph.is_undirected();
    graph
        .edges()
        .filter(move |e| !undirected || e.source < e.target)
}

fn attr_type(value: &AttrValue) -> &'static str {
    match value {
        AttrValue::Number(_) => "double",
        AttrValue::Text(_) => "string",
    }
}

fn attr_text(value: &AttrValue) -> String {
    match value {
        AttrValue::Number(v) => v.to_string(),
        AttrValue::Text(s) => s.clone(),
    }
}

fn to_graphml(graph: &DirectedWeightedGraph, attributes: &NodeAttributes) -> String {
    // one key per (name, type) pair, numbered in sorted order
    let mut keys: BTreeMap<(&str, &'static str), String> = BTreeMap::new();
    for attrs in attributes.values() {
        for (name, value) in attrs {
            keys.entry((name.as_str(), attr_type(value))).or_default();
        }
    }
    for (i, key_id) in keys.values_mut().enumerate() {
        *key_id = format!("d{i}");
    }

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for ((name, ty), key_id) in &keys {
        let _ = writeln!(
            out,
            "  <key id=\"{key_id}\" for=\"node\" attr.name=\"{}\" attr.type=\"{ty}\"/>",
            escape(*name)
        );
    }
    out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    let edgedefault = if graph.is_undirected() {
        "undirected"
    } else {
        "directed"
    };
    let _ = writeln!(out, "  <graph id=\"G\" edgedefault=\"{edgedefault}\">");
    for node in graph.nodes() {
        match attributes.get(&node).filter(|a| !a.is_empty()) {
            None => {
                let _ = writeln!(out, "    <node id=\"{node}\"/>");
            }
            Some(attrs) => {
                let _ = writeln!(out, "    <node id=\"{node}\">");
                for (name, value) in attrs {
                    let key_id = &keys[&(name.as_str(), attr_type(value))];
                    let _ = writeln!(
                        out,
                        "      <data key=\"{key_id}\">{}</data>",
                        escape(attr_text(value).as_str())
                    );
                }
                out.push_str("    </node>\n");
            }
        }
    }
    for (i, e) in exported_edges(graph).enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\">\n      <data key=\"weight\">{}</data>\n    </edge>",
            e.source, e.target, e.weight
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn xml_err(e: impl fmt::Display) -> ExportError {
    ExportError::Xml(e.to_string())
}

fn attribute(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, ExportError> {
    for attr in e.attributes() {
        let attr = attr.map_err(xml_err)?;
        if attr.key.as_ref() == name.as_bytes() {
            return Ok(Some(attr.unescape_value().map_err(xml_err)?.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart<'_>, name: &str) -> Result<String, ExportError> {
    attribute(e, name)?.ok_or_else(|| {
        ExportError::Xml(format!(
            "<{}> is missing attribute `{name}`",
            String::from_utf8_lossy(e.name().as_ref())
        ))
    })
}

fn parse_node_id(raw: &str) -> Result<NodeId, ExportError> {
    let n: u32 = raw
        .trim()
        .parse()
        .map_err(|_| ExportError::Xml(format!("node id `{raw}` is not a positive integer")))?;
    Ok(NodeId::new(n)?)
}

fn parse_number(raw: &str) -> Result<f64, ExportError> {
    raw.trim()
        .parse()
        .map_err(|_| ExportError::Xml(format!("`{raw}` is not a number")))
}

struct KeyDef {
    name: String,
    numeric: bool,
    for_edge: bool,
}

enum Owner {
    Node(NodeId),
    Edge(usize),
}

fn from_graphml(bytes: &[u8]) -> Result<(DirectedWeightedGraph, NodeAttributes), ExportError> {
    let mut reader = Reader::from_reader(bytes);
    let mut keys: BTreeMap<String, KeyDef> = BTreeMap::new();
    let mut nodes: Vec<NodeId> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let mut attributes = NodeAttributes::new();
    let mut undirected = false;
    let mut owner: Option<Owner> = None;
    let mut data_key: Option<String> = None;
    let mut text = String::new();

    let mut buf = Vec::new();
    loop {
        let event = reader.read_event_into(&mut buf).map_err(xml_err)?;
        let is_empty = matches!(event, Event::Empty(_));
        match event {
            Event::Start(e) | Event::Empty(e) => match e.name().as_ref() {
                b"key" => {
                    let id = required(&e, "id")?;
                    let name = attribute(&e, "attr.name")?.unwrap_or_else(|| id.clone());
                    let ty = attribute(&e, "attr.type")?.unwrap_or_else(|| "string".into());
                    let for_edge = attribute(&e, "for")?.as_deref() == Some("edge");
                    let numeric = matches!(ty.as_str(), "double" | "float" | "int" | "long");
                    keys.insert(
                        id,
                        KeyDef {
                            name,
                            numeric,
                            for_edge,
                        },
                    );
                }
                b"graph" => {
                    undirected = attribute(&e, "edgedefault")?.as_deref() == Some("undirected");
                }
                b"node" => {
                    let id = parse_node_id(&required(&e, "id")?)?;
                    nodes.push(id);
                    owner = (!is_empty).then_some(Owner::Node(id));
                }
                b"edge" => {
                    let source = parse_node_id(&required(&e, "source")?)?;
                    let target = parse_node_id(&required(&e, "target")?)?;
                    edges.push((source, target, 1.0));
                    owner = (!is_empty).then_some(Owner::Edge(edges.len() - 1));
                }
                b"data" => {
                    data_key = Some(required(&e, "key")?);
                    text.clear();
                    if is_empty {
                        apply_data(
                            &keys,
                            &owner,
                            &mut data_key,
                            "",
                            &mut attributes,
                            &mut edges,
                        )?;
                    }
                }
                _ => {}
            },
            Event::Text(t) if data_key.is_some() => {
                text.push_str(&t.unescape().map_err(xml_err)?);
            }
            Event::CData(t) if data_key.is_some() => {
                text.push_str(&String::from_utf8_lossy(&t));
            }
            Event::End(e) => match e.name().as_ref() {
                b"data" => {
                    let value = std::mem::take(&mut text);
                    apply_data(
                        &keys,
                        &owner,
                        &mut data_key,
                        &value,
                        &mut attributes,
                        &mut edges,
                    )?;
                }
                b"node" | b"edge" => owner = None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    let mut graph = DirectedWeightedGraph::new();
    for id in nodes {
        graph.add_node(id);
    }
    for (source, target, weight) in edges {
        graph.add_edge(WeightedEdge::new(source, target, weight))?;
        if undirected {
            graph.add_edge(WeightedEdge::new(target, source, weight))?;
        }
    }
    graph.set_undirected(undirected);
    Ok((graph, attributes))
}

fn apply_data(
    keys: &BTreeMap<String, KeyDef>,
    owner: &Option<Owner>,
    data_key: &mut Option<String>,
    value: &str,
    attributes: &mut NodeAttributes,
    edges: &mut [(NodeId, NodeId, f64)],
) -> Result<(), ExportError> {
    let Some(key_id) = data_key.take() else {
        return Ok(());
    };
    let key = keys
        .get(&key_id)
        .ok_or_else(|| ExportError::Xml(format!("data refers to undeclared key `{key_id}`")))?;
    match owner {
        Some(Owner::Node(id)) if !key.for_edge => {
            let parsed = if key.numeric {
                AttrValue::Number(parse_number(value)?)
            } else {
                AttrValue::Text(value.to_string())
            };
            attributes
                .entry(*id)
                .or_default()
                .insert(key.name.clone(), parsed);
        }
        Some(Owner::Edge(i)) if key.name == "weight" => {
            edges[*i].2 = parse_number(value)?;
        }
        _ => {}
    }
    Ok(())
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn to_dot(graph: &DirectedWeightedGraph, attributes: &NodeAttributes) -> String {
    let (kind, arrow) = if graph.is_undirected() {
        ("graph", "--")
    } else {
        ("digraph", "->")
    };
    let mut out = format!("{kind} knowledge_network {{\n  node [shape=circle];\n");
    for node in graph.nodes() {
        let mut parts: Vec<String> = Vec::new();
        if let Some(attrs) = attributes.get(&node) {
            if let Some(AttrValue::Text(name)) = attrs.get("name") {
                parts.push(format!("label={}", dot_quote(name)));
            }
            if let Some(AttrValue::Number(size)) = attrs.get("size") {
                // node diameter in inches grows with the size attribute
                parts.push(format!("width={}", 0.3 + size.max(0.0)));
            }
            for (name, value) in attrs {
                parts.push(format!(
                    "{}={}",
                    dot_quote(name),
                    dot_quote(&attr_text(value))
                ));
            }
        }
        if parts.is_empty() {
            let _ = writeln!(out, "  {};", dot_quote(&node.to_string()));
        } else {
            let _ = writeln!(
                out,
                "  {} [{}];",
                dot_quote(&node.to_string()),
                parts.join(", ")
            );
        }
    }
    for e in exported_edges(graph) {
        let _ = writeln!(
            out,
            "  {} {arrow} {} [weight={w}, label=\"{w}\"];",
            dot_quote(&e.source.to_string()),
            dot_quote(&e.target.to_string()),
            w = e.weight
        );
    }
    out.push_str("}\n");
    out
}

fn to_edge_csv(graph: &DirectedWeightedGraph) -> String {
    let mut out = String::from("source,target,weight\n");
    for e in exported_edges(graph) {
        let _ = writeln!(out, "{},{},{}", e.source, e.target, e.weight);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    directed: bool,
    nodes: Vec<JsonNode>,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: NodeId,
    #[serde(default)]
    attributes: BTreeMap<String, AttrValue>,
    #[serde(default)]
    edges: Vec<JsonEdge>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    target: NodeId,
    weight: f64,
}

fn to_json(
    graph: &DirectedWeightedGraph,
    attributes: &NodeAttributes,
) -> Result<String, ExportError> {
    let nodes = graph
        .nodes()
        .map(|id| JsonNode {
            id,
            attributes: attributes.get(&id).cloned().unwrap_or_default(),
            edges: graph
                .out_neighbors(id)
                .into_iter()
                .flatten()
                .map(|(&target, &weight)| JsonEdge { target, weight })
                .collect(),
        })
        .collect();
    let doc = JsonGraph {
        directed: !graph.is_undirected(),
        nodes,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

fn from_json(bytes: &[u8]) -> Result<(DirectedWeightedGraph, NodeAttributes), ExportError> {
    let doc: JsonGraph = serde_json::from_slice(bytes)?;
    let mut graph = DirectedWeightedGraph::new();
    let mut attributes = NodeAttributes::new();
    for node in &doc.nodes {
        graph.add_node(node.id);
    }
    for node in doc.nodes {
        for e in &node.edges {
            graph.add_edge(WeightedEdge::new(node.id, e.target, e.weight))?;
        }
        if !node.attributes.is_empty() {
            attributes.insert(node.id, node.attributes);
        }
    }
    graph.set_undirected(!doc.directed);
    Ok((graph, attributes))
}
