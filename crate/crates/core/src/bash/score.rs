use super::{AtomicCommand, BashCommandList};
use crate::types::SemanticScore;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BashScoreError {
    #[error("ground truth has no atomic commands")]
    EmptyGroundTruth,
}

/// Pairs of one atom: the program, each option with its value, and each
/// positional keyed by index.
fn pair_count(atom: &AtomicCommand) -> usize {
    1 + atom.options.len() + atom.positionals.len()
}

fn atom_score(gt: &AtomicCommand, pred: Option<&AtomicCommand>) -> SemanticScore {
    let Some(pred) = pred else {
        return SemanticScore::ZERO;
    };
    let program = usize::from(gt.program == pred.program);
    let options = gt
        .options
        .iter()
        .filter(|(k, v)| pred.options.get(*k) == Some(v))
        .count();
    let positionals = gt
        .positionals
        .iter()
        .enumerate()
        .filter(|(i, p)| pred.positionals.get(*i) == Some(p))
        .count();
    SemanticScore::ratio(program + options + positionals, pair_count(gt))
}

/// Mean over ground-truth atoms of the fraction of their pairs found in
/// the aligned prediction atom. Each gt atom takes the earliest unused
/// prediction atom with the same program.
pub fn bash_score(gt: &BashCommandList, pred: &BashCommandList) -> Result<SemanticScore, BashScoreError> {
    if gt.atoms.is_empty() {
        return Err(BashScoreError::EmptyGroundTruth);
    }
    let mut used = vec![false; pred.atoms.len()];
    Ok(SemanticScore::mean(gt.atoms.iter().map(|g| {
        let j = (0..pred.atoms.len()).find(|&j| !used[j] && pred.atoms[j].program == g.program);
        if let Some(j) = j {
            used[j] = true;
        }
        atom_score(g, j.map(|j| &pred.atoms[j]))
    })))
}
