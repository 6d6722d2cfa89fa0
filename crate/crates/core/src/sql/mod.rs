//! SQL queries over the Spider surface: parsing, normalization, schema
//! checks and tree-edit-distance scoring.

mod ast;
mod lex;
mod normalize;
mod parse;
mod schema;
mod tree;
mod validate;

pub use ast::*;
pub use normalize::{normalize_sql, NormalizeError};
pub use parse::parse_sql;
pub use schema::{DatabaseSchema, ForeignKey, SchemaError, SchemaSet, TableSchema};
pub use tree::{Node, NodeKind};
pub use validate::validate_sql;

use crate::ted::{bounded_distance, PostorderTree, ResourceError, DEFAULT_CELL_LIMIT};
use crate::{Diagnostic, SemanticScore, Span};

#[derive(Debug, Clone, PartialEq)]
pub struct SqlAst {
    pub query: Query,
}

impl SqlAst {
    pub fn to_tree(&self) -> Node {
        tree::query_tree(&self.query)
    }

    pub fn to_sql(&self) -> String {
        ast::to_sql(&self.query)
    }

    pub fn normalize(&self) -> Result<SqlAst, NormalizeError> {
        normalize_sql(self)
    }
}

/// A query that failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct SqlError(pub Diagnostic);

impl SqlError {
    pub(crate) fn syntax(src: &str, offset: usize, message: impl Into<String>) -> Self {
        SqlError(Diagnostic::new("SQL_SYNTAX", message).with_span(Span::at_offset(src, offset)))
    }

    pub fn diagnostic(&self) -> &Diagnostic {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SqlScoreError {
    #[error(transparent)]
    Parse(#[from] SqlError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

fn flatten(node: &Node) -> PostorderTree<(NodeKind, String)> {
    PostorderTree::build(node, |n: &Node| (n.kind, n.label.clone()), |n| &n.children)
}

/// Unit-cost ordered edit distance between the two query trees. Labels
/// compare by kind and text.
pub fn tree_edit_distance(a: &SqlAst, b: &SqlAst) -> Result<usize, ResourceError> {
    tree_edit_distance_bounded(a, b, DEFAULT_CELL_LIMIT)
}

pub fn tree_edit_distance_bounded(a: &SqlAst, b: &SqlAst, limit: u64) -> Result<usize, ResourceError> {
    let (ta, tb) = (a.to_tree(), b.to_tree());
    bounded_distance(&flatten(&ta), &flatten(&tb), limit)
}

/// `1 / (1 + d)` over already-normalized trees.
pub fn sql_score(gt: &SqlAst, pred: &SqlAst) -> Result<SemanticScore, ResourceError> {
    let d = tree_edit_distance(gt, pred)?;
    Ok(SemanticScore::new(1.0 / (1.0 + d as f64)).expect("in (0, 1]"))
}

/// Parse, normalize and score two query texts.
pub fn sql_score_text(gt: &str, pred: &str) -> Result<SemanticScore, SqlScoreError> {
    let g = parse_sql(gt)?.normalize()?;
    let p = parse_sql(pred)?.normalize()?;
    Ok(sql_score(&g, &p)?)
}
