//! Corpus BLEU, pass rate and mean AST similarity for a set of predictions.
//!
//!     cargo run --example eval

use dslrepair::metrics::{bleu, evaluate_corpus, tokenize, write_records_csv, EvalInput};
use dslrepair::resources::Resources;
use dslrepair::Language;

fn main() {
    let rows = [
        ("1", "grep -r foo .", "grep foo ."),
        ("2", "ls -l /tmp", "ls -l /tmp"),
        ("3", "find . -name '*.py' | wc -l", "find . -name '*.py' |"),
        ("4", "sort data.txt | uniq -c", "sort data.txt | uniq"),
    ];
    let inputs: Vec<EvalInput> = rows
        .iter()
        .map(|(id, gt, pred)| EvalInput {
            id: id.to_string(),
            language: None,
            query: String::new(),
            prediction: pred.to_string(),
            ground_truth: gt.to_string(),
            db_id: None,
        })
        .collect();
    let (report, records) = evaluate_corpus(&inputs, Language::Bash, &Resources::default()).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    write_records_csv(&records, std::io::stdout()).unwrap();

    let pairs: Vec<_> = rows.iter().map(|(_, gt, pred)| (tokenize(pred), tokenize(gt))).collect();
    println!("BLEU over the raw pairs: {:.4}", bleu(&pairs).unwrap());
}
