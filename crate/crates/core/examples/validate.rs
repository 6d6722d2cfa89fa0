//! Static validation of one program per language, valid and broken.
//!
//!     cargo run --example validate

use std::path::Path;

use dslrepair::resources::Resources;
use dslrepair::sql::SchemaSet;
use dslrepair::{render_report, Language};

fn main() {
    let schema = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/schema.json");
    let resources = Resources {
        schemas: SchemaSet::load(&schema).expect("schema"),
        ..Resources::default()
    };

    let programs = [
        (Language::Bash, "find . -name '*.log' | xargs grep -l error"),
        (Language::Bash, "grep -r foo . |"),
        (Language::Sql, "SELECT name FROM singer WHERE age > 30"),
        (Language::Sql, "SELECT nam FROM singers"),
        (
            Language::Ansible,
            "- hosts: web\n  tasks:\n    - ansible.builtin.apt:\n        name: nginx\n        state: present\n",
        ),
        (
            Language::Ansible,
            "- hosts: web\n  tasks:\n    - ansible.builtin.apt:\n        name: nginx\n        update_cache: sometimes\n    - copy:\n        src: a.conf\n",
        ),
    ];
    for (lang, text) in programs {
        let report = resources.validate(lang, text, Some("concert_singer")).unwrap();
        println!("--- {lang}\n{text}");
        println!("{}", render_report(&report));
    }
}
