use super::{AnsibleError, AnsiblePlay, AnsiblePlaybook, AnsibleTask};
use crate::types::SemanticScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Count the module key as a `("__module__", module)` pair.
    pub include_module: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            include_module: true,
        }
    }
}

/// Fraction of the ground-truth task's (key, value) pairs found in the
/// prediction. The task `name` never participates.
pub fn task_score(gt: &AnsibleTask, pred: Option<&AnsibleTask>) -> SemanticScore {
    task_score_with(gt, pred, ScoreOptions::default())
}

pub fn task_score_with(gt: &AnsibleTask, pred: Option<&AnsibleTask>, opts: ScoreOptions) -> SemanticScore {
    let total = gt.args.len() + usize::from(opts.include_module);
    let Some(pred) = pred else {
        return SemanticScore::ZERO;
    };
    if total == 0 {
        return SemanticScore::ONE;
    }
    let module_hit = opts.include_module && gt.module == pred.module;
    let arg_hits = gt
        .args
        .iter()
        .filter(|(k, v)| pred.args.get(*k).is_some_and(|pv| pv.same_as(v)))
        .count();
    SemanticScore::ratio(arg_hits + usize::from(module_hit), total)
}

/// Greedy order-preserving alignment: each ground-truth task takes the
/// earliest unconsumed prediction task with the same module key.
fn align<'a>(gt: &[AnsibleTask], pred: &'a [AnsibleTask]) -> Vec<Option<&'a AnsibleTask>> {
    let mut used = vec![false; pred.len()];
    gt.iter()
        .map(|g| {
            let j = (0..pred.len()).find(|&j| !used[j] && pred[j].module == g.module)?;
            used[j] = true;
            Some(&pred[j])
        })
        .collect()
}

fn play_score(gt: &AnsiblePlay, pred: Option<&AnsiblePlay>, opts: ScoreOptions) -> SemanticScore {
    let empty: &[AnsibleTask] = &[];
    let pred_tasks = pred.map_or(empty, |p| p.tasks.as_slice());
    let aligned = align(&gt.tasks, pred_tasks);
    SemanticScore::mean(
        gt.tasks
            .iter()
            .zip(aligned)
            .map(|(g, p)| task_score_with(g, p, opts)),
    )
}

/// Mean over index-paired plays of the mean aligned task score.
pub fn playbook_score(gt: &AnsiblePlaybook, pred: &AnsiblePlaybook) -> Result<SemanticScore, AnsibleError> {
    playbook_score_with(gt, pred, ScoreOptions::default())
}

pub fn playbook_score_with(
    gt: &AnsiblePlaybook,
    pred: &AnsiblePlaybook,
    opts: ScoreOptions,
) -> Result<SemanticScore, AnsibleError> {
    if gt.plays.is_empty() {
        return Err(AnsibleError::EmptyPlaybook);
    }
    if let Some(i) = gt.plays.iter().position(|p| p.tasks.is_empty()) {
        return Err(AnsibleError::EmptyPlay { play: i + 1 });
    }
    Ok(SemanticScore::mean(
        gt.plays
            .iter()
            .enumerate()
            .map(|(i, play)| play_score(play, pred.plays.get(i), opts)),
    ))
}
