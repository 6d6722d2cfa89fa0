//! Per-language validation and scoring behind one interface, bound to the
//! registry, arity table and schemas a run was configured with.

use crate::ansible::{self, ModuleSpecRegistry};
use crate::bash::{self, ArityTable};
use crate::sql::{self, SchemaSet};
use crate::ted::ResourceError;
use crate::{Language, SemanticScore, ValidationReport};

#[derive(Debug, Clone)]
pub struct Resources {
    pub registry: ModuleSpecRegistry,
    pub arity: ArityTable,
    pub schemas: SchemaSet,
    /// Database used for SQL records that name none.
    pub default_db: Option<String>,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            registry: ModuleSpecRegistry::builtin(),
            arity: ArityTable::builtin(),
            schemas: SchemaSet::default(),
            default_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MissingResource {
    #[error("no schema loaded for SQL validation")]
    NoSchema,
    #[error("no schema for database `{0}`")]
    UnknownDatabase(String),
    #[error("several schemas are loaded; records must name a db_id")]
    AmbiguousDatabase,
}

/// A prediction's semantic score. Unparseable predictions score 0 with
/// `parsed = false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub score: SemanticScore,
    pub parsed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("ground truth cannot be scored against: {0}")]
    GroundTruth(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

const UNPARSED: Scored = Scored {
    score: SemanticScore::ZERO,
    parsed: false,
};

fn parsed(score: SemanticScore) -> Scored {
    Scored { score, parsed: true }
}

impl Resources {
    pub fn schema(&self, db_id: Option<&str>) -> Result<&sql::DatabaseSchema, MissingResource> {
        let dbs = &self.schemas.databases;
        match db_id.or(self.default_db.as_deref()) {
            Some(db) => dbs.get(db).ok_or_else(|| MissingResource::UnknownDatabase(db.to_string())),
            None => match dbs.len() {
                0 => Err(MissingResource::NoSchema),
                1 => Ok(&dbs[0]),
                _ => Err(MissingResource::AmbiguousDatabase),
            },
        }
    }

    pub fn validate(&self, language: Language, text: &str, db_id: Option<&str>) -> Result<ValidationReport, MissingResource> {
        Ok(match language {
            Language::Ansible => ansible::validate_playbook_text(text, &self.registry),
            Language::Bash => bash::validate_bash_with(text, &self.arity),
            Language::Sql => sql::validate_sql(text, self.schema(db_id)?),
        })
    }

    pub fn parses(&self, language: Language, text: &str) -> bool {
        match language {
            Language::Ansible => ansible::parse_playbook(text).is_ok(),
            Language::Bash => bash::parse_bash_with(text, &self.arity).is_ok(),
            Language::Sql => sql::parse_sql(text).is_ok(),
        }
    }

    pub fn score(&self, language: Language, gt: &str, pred: &str) -> Result<Scored, ScoreError> {
        let gt_err = |e: &dyn std::fmt::Display| ScoreError::GroundTruth(e.to_string());
        match language {
            Language::Ansible => {
                let g = ansible::parse_playbook(gt).map_err(|e| gt_err(&e))?;
                let Ok(p) = ansible::parse_playbook(pred) else {
                    return Ok(UNPARSED);
                };
                ansible::playbook_score(&g, &p).map(parsed).map_err(|e| gt_err(&e))
            }
            Language::Bash => {
                let g = bash::parse_bash_with(gt, &self.arity).map_err(|e| gt_err(&e))?;
                let Ok(p) = bash::parse_bash_with(pred, &self.arity) else {
                    return Ok(UNPARSED);
                };
                bash::bash_score(&g, &p).map(parsed).map_err(|e| gt_err(&e))
            }
            Language::Sql => {
                let g = sql::parse_sql(gt)
                    .map_err(|e| gt_err(&e))?
                    .normalize()
                    .map_err(|e| gt_err(&e))?;
                let Some(p) = sql::parse_sql(pred).ok().and_then(|p| p.normalize().ok()) else {
                    return Ok(UNPARSED);
                };
                Ok(parsed(sql::sql_score(&g, &p)?))
            }
        }
    }
}
