//! Minimal YAML tree loader shared by the config and schema parsers.
//!
//! The loader works on the raw event stream so callers see the exact scalar
//! text, the scalar style, and any explicit tag. Aliases are expanded into
//! copies of the anchored node before the tree is handed out.

use std::collections::HashMap;

use yaml_rust2::parser::{MarkedEventReceiver, Parser, Tag};
use yaml_rust2::scanner::{Marker, TScalarStyle};
use yaml_rust2::Event;

/// Upper bound on nodes produced by alias expansion.
const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Node {
    pub tag: Option<String>,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NodeKind {
    Scalar { text: String, plain: bool },
    Sequence(Vec<Node>),
    Mapping(Vec<(Node, Node)>),
}

impl Node {
    /// Plain scalars that the YAML core schema resolves to null.
    pub fn is_null(&self) -> bool {
        match &self.kind {
            NodeKind::Scalar { text, plain: true } => {
                matches!(text.as_str(), "" | "~" | "null" | "Null" | "NULL")
            }
            _ => false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            NodeKind::Scalar { .. } => "scalar",
            NodeKind::Sequence(_) => "sequence",
            NodeKind::Mapping(_) => "mapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LoadError {
    Syntax(String),
    MultipleDocuments,
    TooLarge,
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Syntax(msg) => f.write_str(msg),
            LoadError::MultipleDocuments => f.write_str("multi-document YAML streams are not supported"),
            LoadError::TooLarge => f.write_str("alias expansion exceeds the node limit"),
        }
    }
}

enum Frame {
    Sequence { anchor: usize, tag: Option<String>, items: Vec<Node> },
    Mapping { anchor: usize, tag: Option<String>, entries: Vec<(Node, Node)>, pending_key: Option<Node> },
}

#[derive(Default)]
struct TreeBuilder {
    stack: Vec<Frame>,
    anchors: HashMap<usize, Node>,
    documents: Vec<Node>,
    document_count: usize,
    produced: usize,
    error: Option<LoadError>,
}

fn tag_string(tag: Option<Tag>) -> Option<String> {
    tag.map(|t| format!("{}{}", t.handle, t.suffix))
}

fn count_nodes(node: &Node) -> usize {
    match &node.kind {
        NodeKind::Scalar { .. } => 1,
        NodeKind::Sequence(items) => 1 + items.iter().map(count_nodes).sum::<usize>(),
        NodeKind::Mapping(entries) => 1 + entries.iter().map(|(k, v)| count_nodes(k) + count_nodes(v)).sum::<usize>(),
    }
}

impl TreeBuilder {
    fn push_node(&mut self, node: Node, anchor: usize) {
        if anchor != 0 {
            self.anchors.insert(anchor, node.clone());
        }
        match self.stack.last_mut() {
            None => self.documents.push(node),
            Some(Frame::Sequence { items, .. }) => items.push(node),
            Some(Frame::Mapping { entries, pending_key, .. }) => match pending_key.take() {
                None => *pending_key = Some(node),
                Some(key) => entries.push((key, node)),
            },
        }
    }
}

impl MarkedEventReceiver for TreeBuilder {
    fn on_event(&mut self, ev: Event, _mark: Marker) {
        if self.error.is_some() {
            return;
        }
        match ev {
            Event::DocumentStart => {
                self.document_count += 1;
                if self.document_count > 1 {
                    self.error = Some(LoadError::MultipleDocuments);
                }
            }
            Event::Scalar(text, style, anchor, tag) => {
                self.produced += 1;
                let node =
                    Node { tag: tag_string(tag), kind: NodeKind::Scalar { text, plain: style == TScalarStyle::Plain } };
                self.push_node(node, anchor);
            }
            Event::SequenceStart(anchor, tag) => {
                self.produced += 1;
                self.stack.push(Frame::Sequence { anchor, tag: tag_string(tag), items: Vec::new() });
            }
            Event::MappingStart(anchor, tag) => {
                self.produced += 1;
                self.stack.push(Frame::Mapping {
                    anchor,
                    tag: tag_string(tag),
                    entries: Vec::new(),
                    pending_key: None,
                });
            }
            Event::SequenceEnd | Event::MappingEnd => {
                let (node, anchor) = match self.stack.pop() {
                    Some(Frame::Sequence { anchor, tag, items }) => {
                        (Node { tag, kind: NodeKind::Sequence(items) }, anchor)
                    }
                    Some(Frame::Mapping { anchor, tag, entries, .. }) => {
                        (Node { tag, kind: NodeKind::Mapping(entries) }, anchor)
                    }
                    None => {
                        self.error = Some(LoadError::Syntax("unbalanced collection end".into()));
                        return;
                    }
                };
                self.push_node(node, anchor);
            }
            Event::Alias(id) => match self.anchors.get(&id).cloned() {
                Some(node) => {
                    self.produced += count_nodes(&node);
                    if self.produced > MAX_NODES {
                        self.error = Some(LoadError::TooLarge);
                        return;
                    }
                    self.push_node(node, 0);
                }
                None => self.error = Some(LoadError::Syntax(format!("unknown alias {id}"))),
            },
            _ => {}
        }
    }
}

/// Loads a single-document YAML text. Returns `None` for an empty stream.
pub(crate) fn load(text: &str) -> Result<Option<Node>, LoadError> {
    let mut builder = TreeBuilder::default();
    let mut parser = Parser::new_from_str(text);
    parser.load(&mut builder, true).map_err(|e| LoadError::Syntax(e.to_string()))?;
    if let Some(err) = builder.error {
        return Err(err);
    }
    Ok(builder.documents.pop())
}
