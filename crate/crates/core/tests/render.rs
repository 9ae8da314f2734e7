use std::collections::BTreeSet;
use std::path::PathBuf;

use a4c_core::render::{
    all_anchors, docs_bundle, full_tree, render_activity, render_context, render_deployment,
    render_prompts, OutputTree, RendererRegistry,
};
use a4c_core::TaskKey;
use a4c_testkit::{load, load_text, FIXTURES};

/// Splits a DOT or PlantUML line into tokens, keeping quoted strings whole.
fn tokens(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                cur.push(c);
                while let Some(d) = chars.next() {
                    cur.push(d);
                    if d == '\\' {
                        if let Some(e) = chars.next() {
                            cur.push(e);
                        }
                    } else if d == '"' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() || "[];,=:{}".contains(c) => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                if "[];,=:{}".contains(c) {
                    out.push(c.to_string());
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn brace_depths(text: &str) -> Result<(), String> {
    let mut depth = 0i32;
    for (n, line) in text.lines().enumerate() {
        for t in tokens(line) {
            match t.as_str() {
                "{" => depth += 1,
                "}" => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return Err(format!("line {}: unbalanced `}}`", n + 1));
            }
        }
    }
    if depth != 0 {
        return Err(format!("{depth} unclosed `{{`"));
    }
    Ok(())
}

/// Well-formed DOT subset: one digraph, balanced braces, every edge
/// endpoint declared on an earlier line.
fn check_dot(text: &str) -> Result<(), String> {
    if !text.starts_with("digraph ") {
        return Err("does not start with `digraph`".into());
    }
    brace_depths(text)?;
    let mut declared = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let t = tokens(line);
        if let Some(arrow) = t.iter().position(|x| x == "->") {
            for end in [&t[arrow - 1], &t[arrow + 1]] {
                if !declared.contains(end.as_str()) {
                    return Err(format!("line {}: `{end}` used before declaration", n + 1));
                }
            }
        } else if t.len() >= 2
            && t[1] == "["
            && !["node", "edge", "graph"].contains(&t[0].as_str())
            && !declared.insert(t[0].clone())
        {
            return Err(format!("line {}: `{}` declared twice", n + 1, t[0]));
        }
    }
    Ok(())
}

/// Well-formed PlantUML subset: framing, balanced blocks, aliases
/// declared before relationships use them.
fn check_puml(text: &str) -> Result<(), String> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first() != Some(&"@startuml") || lines.last() != Some(&"@enduml") {
        return Err("missing @startuml/@enduml framing".into());
    }
    brace_depths(text)?;
    let mut style = 0;
    let mut legend = 0;
    let mut aliases = BTreeSet::new();
    for (n, line) in lines.iter().enumerate() {
        let line = line.trim();
        match line {
            "<style>" => style += 1,
            "</style>" => style -= 1,
            l if l.starts_with("legend") => legend += 1,
            "endlegend" => legend -= 1,
            _ => {}
        }
        if style < 0 || legend < 0 || style > 1 || legend > 1 {
            return Err(format!("line {}: unbalanced block", n + 1));
        }
        if style > 0 || legend > 0 || line.starts_with('\'') {
            continue;
        }
        let t = tokens(line);
        if let Some(k) = t.iter().position(|x| x == "as") {
            if !aliases.insert(t[k + 1].clone()) {
                return Err(format!("line {}: alias `{}` declared twice", n + 1, t[k + 1]));
            }
        } else if let Some(arrow) = t.iter().position(|x| x == "-->") {
            for end in [&t[arrow - 1], &t[arrow + 1]] {
                if !aliases.contains(end.as_str()) {
                    return Err(format!("line {}: alias `{end}` used before declaration", n + 1));
                }
            }
        }
    }
    if style != 0 || legend != 0 {
        return Err("unclosed block".into());
    }
    Ok(())
}

#[test]
fn checkers_reject_malformed_text() {
    assert!(check_dot("digraph g {\n a [label=\"x\"];\n a -> b;\n}\n").is_err());
    assert!(check_dot("digraph g {\n a [label=\"{\"];\n").is_err());
    assert!(check_dot("digraph g {\n a [label=\"}\"];\n b [];\n a -> b;\n}\n").is_ok());
    assert!(check_puml("@startuml\nx --> y\n@enduml").is_err());
    assert!(check_puml("@startuml\nnode \"a\" as a {\n@enduml").is_err());
    assert!(check_puml("@startuml\nactor \"a\" as a\nactor \"b\" as b\na --> b : T\n@enduml").is_ok());
}

fn tasks(name: &str) -> Vec<TaskKey> {
    let m = load(name);
    m.tasks()
        .map(|(a, t)| TaskKey::new(&a.name.name, &t.name.name))
        .collect()
}

#[test]
fn every_diagram_is_well_formed() {
    for name in FIXTURES {
        let m = load(name);
        check_puml(&render_context(&m).body).unwrap_or_else(|e| panic!("{name} c1: {e}"));
        if m.deployment().is_some() {
            check_puml(&render_deployment(&m).unwrap().body).unwrap_or_else(|e| panic!("{name} c2: {e}"));
        }
        for key in tasks(name) {
            if let Ok(d) = render_activity(&m, &key) {
                check_dot(&d.body).unwrap_or_else(|e| panic!("{name} {key}: {e}\n{}", d.body));
            }
        }
    }
}

#[test]
fn every_element_has_an_anchor_present_in_output() {
    for name in FIXTURES {
        let m = load(name);
        let anchors = all_anchors(&m);
        let tree = full_tree(&m).unwrap();
        for e in m.elements() {
            assert!(anchors.contains_key(&e), "{name}: no anchor for {e}");
        }
        let bundle = docs_bundle(&m);
        for (e, target) in &bundle.anchors {
            let (path, id) = target.split_once('#').unwrap();
            let page = tree.get(&format!("docs/{path}")).unwrap_or_else(|| panic!("{path}"));
            assert!(page.contains(&format!("id=\"{id}\"")), "{name}: {e} not anchored in {path}");
        }
        for e in m.elements() {
            assert!(bundle.anchors.contains_key(&e), "{name}: {e} missing from docs");
        }
    }
}

#[test]
fn diagram_anchors_occur_in_body() {
    for name in FIXTURES {
        let m = load(name);
        let mut diagrams = vec![render_context(&m)];
        diagrams.extend(render_deployment(&m));
        for key in tasks(name) {
            diagrams.extend(render_activity(&m, &key));
        }
        for d in diagrams {
            for (e, id) in &d.anchors {
                assert!(d.body.contains(id.as_str()), "{name}: {e} anchor `{id}` absent");
            }
        }
    }
}

#[test]
fn rendering_is_deterministic() {
    for name in FIXTURES {
        let a = full_tree(&load(name)).unwrap();
        let b = full_tree(&load(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tree = full_tree(&load("testgen")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(tree.get("manifest.json").unwrap()).unwrap();
    let listed: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    let expected: Vec<&str> = tree.paths().filter(|p| *p != "manifest.json").collect();
    assert_eq!(listed, expected);
    for f in manifest["files"].as_array().unwrap() {
        let content = tree.get(f["path"].as_str().unwrap()).unwrap();
        let hash = f["sha256"].as_str().unwrap();
        assert_eq!(hash.len(), 64);
        assert_eq!(hash, sha256_hex(content.as_bytes()));
    }
}

/// Plain FIPS 180-4 SHA-256, independent of the crate under test.
fn sha256_hex(data: &[u8]) -> String {
    const K: [u32; 64] = [
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
        0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
        0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
        0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
        0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
    ];
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
    ];
    let mut msg = data.to_vec();
    msg.push(0x80);
    while msg.len() % 64 != 56 {
        msg.push(0);
    }
    msg.extend_from_slice(&((data.len() as u64) * 8).to_be_bytes());
    for block in msg.chunks(64) {
        let mut w = [0u32; 64];
        for i in 0..16 {
            w[i] = u32::from_be_bytes(block[4 * i..4 * i + 4].try_into().unwrap());
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16].wrapping_add(s0).wrapping_add(w[i - 7]).wrapping_add(s1);
        }
        let mut v = h;
        for i in 0..64 {
            let s1 = v[4].rotate_right(6) ^ v[4].rotate_right(11) ^ v[4].rotate_right(25);
            let ch = (v[4] & v[5]) ^ (!v[4] & v[6]);
            let t1 = v[7].wrapping_add(s1).wrapping_add(ch).wrapping_add(K[i]).wrapping_add(w[i]);
            let s0 = v[0].rotate_right(2) ^ v[0].rotate_right(13) ^ v[0].rotate_right(22);
            let maj = (v[0] & v[1]) ^ (v[0] & v[2]) ^ (v[1] & v[2]);
            let t2 = s0.wrapping_add(maj);
            v = [t1.wrapping_add(t2), v[0], v[1], v[2], v[3].wrapping_add(t1), v[4], v[5], v[6]];
        }
        for (a, b) in h.iter_mut().zip(v) {
            *a = a.wrapping_add(b);
        }
    }
    h.iter().map(|x| format!("{x:08x}")).collect()
}

#[test]
fn sha256_oracle_matches_known_vector() {
    assert_eq!(
        sha256_hex(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

#[test]
fn render_errors() {
    let m = load_text(r#"model "m" { context { system X } }"#, "m.a4c");
    assert_eq!(render_deployment(&m).unwrap_err().code, "R001");
    let mut out = OutputTree::default();
    assert_eq!(RendererRegistry::standard().render(&m, "c2", &mut out).unwrap_err().code, "R001");
    RendererRegistry::standard().render(&m, "all", &mut out).unwrap();
    assert_eq!(out.paths().collect::<Vec<_>>(), ["c1.puml"]);
    assert_eq!(RendererRegistry::standard().render(&m, "c9", &mut out).unwrap_err().code, "R000");

    let r = load("resell");
    let leaf = TaskKey::new("ImageAnalyst", "analyze");
    assert_eq!(render_activity(&r, &leaf).unwrap_err().code, "R002");
    let composite = TaskKey::new("ResellPipeline", "appraise");
    assert_eq!(render_prompts(&r, &composite).unwrap_err().code, "R003");
    assert!(render_prompts(&r, &leaf).unwrap().contains("| **role**"));
}

#[test]
fn minimal_model_docs_have_index_and_context_only() {
    let m = load_text(r#"model "m" { context { system X } }"#, "m.a4c");
    let docs = docs_bundle(&m);
    assert_eq!(docs.files.keys().collect::<Vec<_>>(), ["c1.md", "index.md"]);
}

#[test]
fn docs_state_pattern_of_composite_tasks() {
    let docs = docs_bundle(&load("resell"));
    let c3 = &docs.files["c3.md"];
    let section = c3.split("## ").find(|s| s.contains("MarketSearchConductor.estimate")).unwrap();
    assert!(section.contains("Pattern: **Orchestration**"), "{section}");
    assert!(docs.files.contains_key("agents/EbayResearcher.md"));
    let c4 = &docs.files["c4.md"];
    assert!(c4.contains("search:EbayApi"), "{c4}");
    assert!(c4.contains("| Part | Content |"), "{c4}");
}

#[test]
fn output_paths_are_safe() {
    for name in FIXTURES {
        for p in full_tree(&load(name)).unwrap().paths() {
            assert!(a4c_core::render::is_safe_relative(p), "{p}");
        }
    }
}

fn golden_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/golden").join(name)
}

/// Compares the full output tree against checked-in files. Set
/// `A4C_BLESS=1` to rewrite them.
#[test]
fn goldens() {
    let bless = std::env::var("A4C_BLESS").is_ok_and(|v| v == "1");
    for name in FIXTURES {
        let tree = full_tree(&load(name)).unwrap();
        let dir = golden_dir(name);
        if bless {
            let _ = std::fs::remove_dir_all(&dir);
            tree.write_to(&dir).unwrap();
            continue;
        }
        for (path, content) in tree.files() {
            let want = std::fs::read_to_string(dir.join(path))
                .unwrap_or_else(|e| panic!("golden {name}/{path}: {e}; rerun with A4C_BLESS=1"));
            assert_eq!(content, &want, "golden {name}/{path} differs");
        }
        let mut on_disk = Vec::new();
        collect(&dir, &dir, &mut on_disk);
        let produced: Vec<String> = tree.paths().map(String::from).collect();
        on_disk.sort();
        assert_eq!(on_disk, produced, "{name}: stale golden files");
    }
}

fn collect(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<String>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            collect(root, &p, out);
        } else {
            out.push(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
        }
    }
}
