//! Tree edit distance between normalized SQL queries.
//!
//!     cargo run --example tree_distance

use dslrepair::sql::{parse_sql, sql_score, tree_edit_distance};

fn main() {
    let gt = parse_sql("SELECT T1.name FROM singer AS T1 WHERE T1.age > 30 ORDER BY T1.age")
        .unwrap()
        .normalize()
        .unwrap();
    for pred in [
        "SELECT singer.name FROM singer WHERE singer.age > 30 ORDER BY singer.age",
        "SELECT name FROM singer WHERE age > 30",
        "SELECT name, country FROM singer WHERE age >= 30 ORDER BY age DESC",
    ] {
        // Scoring compares normalized trees.
        let p = parse_sql(pred).unwrap().normalize().unwrap();
        println!(
            "distance {:>2}  score {:.4}  {pred}",
            tree_edit_distance(&gt, &p).unwrap(),
            sql_score(&gt, &p).unwrap().value()
        );
    }
    println!("{}", gt.to_tree());
}
