use dslrepair::Language;

use crate::support;
use crate::Outcome;

pub fn run() -> Outcome {
    let res = support::resources();
    let mut summary = Vec::new();
    for language in [Language::Ansible, Language::Bash, Language::Sql] {
        let entries = support::corpus(language);
        let valid = entries.iter().filter(|e| e.expected.is_empty()).count();
        let invalid = entries.len() - valid;
        if valid < 30 || invalid < 30 {
            return Err(format!("{language}: {valid} valid and {invalid} invalid files, need 30 of each"));
        }
        for e in &entries {
            let text = std::fs::read_to_string(&e.file).map_err(|err| format!("{}: {err}", e.file.display()))?;
            let report = res
                .validate(language, &text, e.db_id.as_deref())
                .map_err(|err| format!("{}: {err}", e.file.display()))?;
            let got = support::error_codes(&report);
            if report.passed != e.expected.is_empty() || got != e.expected {
                return Err(format!(
                    "{}: passed={} codes {:?}, annotated {:?}",
                    e.file.display(),
                    report.passed,
                    got,
                    e.expected
                ));
            }
        }
        summary.push(format!("{language} {valid}+{invalid}"));
    }
    Ok(format!("100% agreement ({})", summary.join(", ")))
}
