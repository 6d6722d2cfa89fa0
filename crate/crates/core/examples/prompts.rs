//! Print every prompt template, then a filled repair prompt.
//!
//!     cargo run --example prompts

use std::collections::HashMap;

use dslrepair::modelclient::{format_examples, render_prompt, template, PromptRole};
use dslrepair::Language;

fn main() {
    for role in [PromptRole::Generate, PromptRole::Repair, PromptRole::Icl] {
        for lang in Language::ALL {
            println!("=== {role:?} / {lang}");
            println!("{}", template(role, lang).body);
        }
    }

    let examples = format_examples([("count users", "SELECT count(*) FROM users")]);
    let fills = HashMap::from([("examples", examples.as_str()), ("task", "name of the oldest user")]);
    println!("=== filled");
    println!("{}", render_prompt(&template(PromptRole::Icl, Language::Sql), &fills).unwrap());
}
