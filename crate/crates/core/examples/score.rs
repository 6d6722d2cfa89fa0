//! AST-based semantic similarity in each language.
//!
//!     cargo run --example score

use dslrepair::resources::Resources;
use dslrepair::Language;

fn main() {
    let resources = Resources::default();
    let pairs = [
        (Language::Bash, "grep -r foo .", "grep foo ."),
        (Language::Bash, "(cd /tmp && ls -a)", "cd /tmp && ls"),
        (
            Language::Sql,
            "SELECT T1.name FROM singer AS T1 WHERE T1.age > 30",
            "SELECT s.name FROM singer s WHERE s.age > 30",
        ),
        (Language::Sql, "SELECT name FROM singer WHERE age > 30", "SELECT name FROM singer WHERE age < 30"),
        (
            Language::Ansible,
            "- hosts: all\n  tasks:\n    - apt:\n        name: nginx\n        state: present\n",
            "- hosts: all\n  tasks:\n    - name: install it\n      apt:\n        name: nginx\n        state: latest\n",
        ),
    ];
    for (lang, gt, pred) in pairs {
        let s = resources.score(lang, gt, pred).unwrap();
        println!("{lang:<8} {:.4}  {gt:?}  vs  {pred:?}", s.score.value());
    }
    // Predictions that do not parse score 0.
    let s = resources.score(Language::Bash, "ls", "ls |").unwrap();
    println!("unparseable prediction: score {} parsed {}", s.score.value(), s.parsed);
}
