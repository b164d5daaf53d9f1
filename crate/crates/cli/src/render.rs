//! Text summaries, derived only from the JSON reports.

use serde_json::Value;
use std::fmt::Write;

fn s(v: &Value) -> String {
    match v {
        Value::String(t) => t.clone(),
        Value::Null => "-".into(),
        v => v.to_string(),
    }
}

fn epoint(v: &Value) -> String {
    match v {
        Value::Object(_) => format!("({}, {})", s(&v["x"]), s(&v["y"])),
        v => s(v),
    }
}

fn cpoint(v: &Value) -> String {
    format!("({} : {} : {})", s(&v["x"]), s(&v["y"]), s(&v["z"]))
}

fn items(v: &Value) -> &[Value] {
    v.as_array().map(Vec::as_slice).unwrap_or(&[])
}

fn checks(out: &mut String, list: &Value) {
    for c in items(list) {
        let mark = if c["passed"] == Value::Bool(true) { "ok  " } else { "FAIL" };
        let _ = writeln!(out, "  [{mark}] {}", s(&c["name"]));
    }
}

fn table(out: &mut String, v: &Value) {
    for line in items(&v["table"]) {
        let _ = writeln!(out, "{}", s(line));
    }
}

fn analyze(out: &mut String, v: &Value) {
    let _ = writeln!(out, "a = {}", s(&v["a"]));
    let _ = writeln!(out, "C_a: {}", s(&v["c_a"]));
    let _ = writeln!(out, "E_a: {}", s(&v["e_a"]["equation"]));
    let _ = writeln!(out, "E':  {}", s(&v["e_prime"]["equation"]));
    let _ = writeln!(out, "identities:");
    checks(out, &v["identities"]["checks"]);
    let _ = writeln!(out, "degrees:");
    for d in items(&v["degrees"]) {
        let _ = writeln!(out, "  deg {} = {}", s(&d["map"]), s(&d["degree"]));
    }
    let m = &v["cassels"]["m"];
    let _ = writeln!(
        out,
        "Cassels matrix: [[{}, {}], [{}, {}]], det {}",
        s(&m[0][0]),
        s(&m[0][1]),
        s(&m[1][0]),
        s(&m[1][1]),
        s(&v["cassels"]["det"])
    );
    let _ = writeln!(out, "all passed: {}", s(&v["all_passed"]));
}

fn rank(out: &mut String, v: &Value) {
    let _ = writeln!(out, "a = {}  ({} descent)", s(&v["a"]), s(&v["mode"]));
    let basis: Vec<String> = items(&v["basis"]).iter().map(s).collect();
    let _ = writeln!(out, "basis: {{{}}}", basis.join(", "));
    let _ = writeln!(out, "surviving cells: {}", s(&v["survivors"]));
    let gens: Vec<String> = items(&v["generators"]).iter().map(epoint).collect();
    let _ = writeln!(out, "generators mod 2E: {}", gens.join(", "));
    let _ = writeln!(out, "rank E_a(Q) = {}", s(&v["rank"]));
    table(out, v);
}

fn rootnumber(out: &mut String, v: &Value) {
    let r = &v["report"];
    let _ = writeln!(out, "E' for a = {} (q = {})", s(&r["a"]), s(&r["q"]));
    for p in items(&r["places"]) {
        let place = match &p["place"] {
            Value::Object(m) => m.get("prime").map(s).unwrap_or_default(),
            other => s(other),
        };
        let _ = writeln!(out, "  w_{place:<8} = {:>2}  {} (case {})", s(&p["w"]), s(&p["reduction"]), s(&p["case"]));
    }
    let _ = writeln!(out, "w(E') = {}", s(&r["w_global"]));
    if let Value::Object(_) = &v["parity"] {
        let _ = writeln!(
            out,
            "rank E'(Q) is {}, so at least {} (assuming {})",
            s(&v["parity"]["rank_parity"]),
            s(&v["parity"]["rank_at_least"]),
            s(&v["parity"]["conditional"])
        );
    }
}

fn points(out: &mut String, v: &Value) {
    let b = &v["budget"];
    let g = &v["generator"];
    let _ = writeln!(out, "a = {}", s(&v["a"]));
    let _ = writeln!(
        out,
        "rank E_a(Q) = {} ({} surviving descent cells)",
        s(&v["descent_rank"]),
        s(&v["descent_survivors"])
    );
    if let Value::Object(_) = &v["parity"] {
        let _ = writeln!(out, "w(E') = {}", s(&v["parity"]["w_global"]));
    }
    let _ =
        writeln!(out, "generator R = {}, index {} over P0, h(R) = {}", epoint(&g["r"]), s(&g["index"]), s(&b["h_r"]));
    let _ = writeln!(
        out,
        "B = {} (constant 24: {}, computed: {}{})",
        s(&b["b"]),
        s(&b["b_const"]),
        s(&b["b_own"]),
        if b["bounds_disagree"] == Value::Bool(true) { ", disagree" } else { "" }
    );
    let _ = writeln!(out, "B/h(R) = {}, nMax = {}", s(&b["ratio"]), s(&b["n_max"]));
    let _ = writeln!(out, "targets: {}, pullbacks: {}", items(&v["targets"]).len(), items(&v["pullbacks"]).len());
    for c in items(&v["coleman"]) {
        let _ = writeln!(out, "#C(F_{}) = {}, bound {}", s(&c["p"]), s(&c["points_mod_p"]), s(&c["bound"]));
    }
    table(out, v);
    let pts: Vec<String> = items(&v["points"]).iter().map(cpoint).collect();
    let _ = writeln!(out, "C_a(Q) = {{{}}}", pts.join(", "));
}

fn survey(out: &mut String, v: &Value) {
    let _ = writeln!(
        out,
        "a,divisible_by_3,q_3_mod_4,minus_prime,plus_prime,descent_hypothesis,eligible,descent_rank,w_global,error"
    );
    for r in items(&v["rows"]) {
        let cols = [
            "a",
            "divisible_by_3",
            "q_3_mod_4",
            "minus_prime",
            "plus_prime",
            "descent_hypothesis",
            "eligible",
            "descent_rank",
            "w_global",
        ];
        let mut line: Vec<String> =
            cols.iter().map(|c| if r[c].is_null() { String::new() } else { s(&r[c]) }).collect();
        line.push(r["error"].as_str().map(|e| format!("\"{}\"", e.replace('"', "'"))).unwrap_or_default());
        let _ = writeln!(out, "{}", line.join(","));
    }
}

fn verify(out: &mut String, v: &Value) {
    let _ = writeln!(out, "seed {}, {} sample values of a", s(&v["seed"]), items(&v["samples"]).len());
    checks(out, &v["param_identities"]);
    for r in items(&v["construction"]) {
        let _ = writeln!(out, "a = {}:", s(&r["a"]));
        checks(out, &r["checks"]);
    }
    let _ = writeln!(out, "all passed: {}", s(&v["all_passed"]));
}

pub fn text(v: &Value) -> String {
    let mut out = String::new();
    match v["command"].as_str() {
        Some("analyze") => analyze(&mut out, v),
        Some("rank") => rank(&mut out, v),
        Some("rootnumber") => rootnumber(&mut out, v),
        Some("points") => points(&mut out, v),
        Some("survey") => survey(&mut out, v),
        Some("verify-identities") => verify(&mut out, v),
        _ => out = serde_json::to_string_pretty(v).unwrap_or_default() + "\n",
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn points_summary_ends_with_point_list() {
        let v = json!({
            "command": "points", "a": "3", "descent_rank": "1", "descent_survivors": "4",
            "generator": { "r": { "x": "-9", "y": "6" }, "index": "1" },
            "budget": { "h_r": "1.0", "b": "2", "b_const": "2", "b_own": "1", "bounds_disagree": false, "ratio": "2", "n_max": "1" },
            "points": [{ "x": "1", "y": "4", "z": "1" }, { "x": "1", "y": "1", "z": "0" }],
        });
        let t = text(&v);
        assert!(t.trim_end().ends_with("C_a(Q) = {(1 : 4 : 1), (1 : 1 : 0)}"));
        assert!(t.contains("R = (-9, 6)"));
    }

    #[test]
    fn survey_is_csv() {
        let v = json!({ "command": "survey", "rows": [{ "a": "21", "eligible": true, "descent_rank": "1", "w_global": "-1", "error": null }] });
        let t = text(&v);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("21,"));
        assert_eq!(lines[1].split(',').count(), lines[0].split(',').count());
    }

    #[test]
    fn unknown_falls_back_to_json() {
        let v = json!({ "x": "1" });
        assert!(text(&v).contains("\"x\""));
    }
}
