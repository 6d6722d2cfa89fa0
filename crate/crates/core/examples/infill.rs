//! Inline roles and resolve variables in a playbook.
//!
//!     cargo run --example infill

use std::fs;

use dslrepair::ansible::{infill_playbook, parse_playbook, RoleContext};

fn main() {
    let root = std::env::temp_dir().join(format!("dslrepair-infill-{}", std::process::id()));
    let role = root.join("roles/web");
    fs::create_dir_all(role.join("tasks")).unwrap();
    fs::create_dir_all(role.join("defaults")).unwrap();
    fs::write(
        role.join("tasks/main.yml"),
        "- name: install server\n  apt:\n    name: \"{{ web_package }}\"\n    state: present\n\
         - name: open port\n  community.general.ufw:\n    rule: allow\n    port: \"{{ web_port }}\"\n",
    )
    .unwrap();
    fs::write(role.join("defaults/main.yml"), "web_package: nginx\nweb_port: 80\n").unwrap();

    let playbook = parse_playbook("- hosts: web\n  vars:\n    web_port: 8080\n  roles:\n    - web\n").unwrap();
    let infilled = infill_playbook(&playbook, &RoleContext::new(&root)).unwrap();
    print!("{}", infilled.playbook.to_yaml_string());
    for d in &infilled.diagnostics {
        println!("# {d}");
    }
    fs::remove_dir_all(&root).unwrap();
}
