use reqrag_core::eval::{evolution_report, Change, RequirementRecord};

fn records() -> Vec<RequirementRecord> {
    let mut r = Vec::new();
    let mut add = |year: i32, n: usize, cats: &[&str]| {
        for _ in 0..n {
            r.push(RequirementRecord::new(year, cats.iter().copied()));
        }
    };
    add(2015, 5, &["IT Security"]);
    add(2015, 342, &["Functional Safety"]);
    add(2015, 1140, &["Functional (General)"]);
    add(2023, 18, &["IT Security", "Network Segmentation"]);
    add(2023, 27, &["IT Security", "Authentication"]);
    add(2023, 31, &["IT Security", "Vulnerability Mgmt"]);
    add(2023, 19, &["IT Security"]);
    add(2023, 187, &["Functional Safety"]);
    add(2023, 387, &["Functional (General)"]);
    // years outside the window are ignored
    add(2018, 40, &["IT Security"]);
    r
}

#[test]
fn reference_rows() {
    let t = evolution_report(&records(), 2015, 2023).unwrap();
    let row = |c: &str| {
        let r = t.row(c).unwrap_or_else(|| panic!("{c}"));
        (r.count_start, r.count_end, r.change.to_string())
    };
    assert_eq!((t.total.count_start, t.total.count_end, t.total.change.to_string()), (1487, 669, "-55%".into()));
    assert_eq!(row("IT Security"), (5, 95, "+1,800%".into()));
    assert_eq!(row("Functional Safety"), (342, 187, "-45%".into()));
    assert_eq!(row("Functional (General)"), (1140, 387, "-66%".into()));
    assert_eq!(row("Network Segmentation"), (0, 18, "New".into()));
    assert_eq!(row("Authentication"), (0, 27, "New".into()));
    assert_eq!(row("Vulnerability Mgmt"), (0, 31, "New".into()));
}

#[test]
fn change_column_recomputes_from_counts() {
    let t = evolution_report(&records(), 2015, 2023).unwrap();
    for r in t.rows.iter().chain([&t.total]) {
        assert_eq!(r.change, Change::between(r.count_start, r.count_end));
    }
}

#[test]
fn rendered_table_carries_formatted_counts() {
    let text = evolution_report(&records(), 2015, 2023).unwrap().render_text();
    let total = text.lines().find(|l| l.starts_with("Total Requirements")).unwrap();
    assert!(total.contains("1,487") && total.contains("669") && total.trim_end().ends_with("-55%"), "{total}");
    let sec = text.lines().find(|l| l.starts_with("IT Security")).unwrap();
    assert!(sec.trim_end().ends_with("+1,800%"), "{sec}");
    let seg = text.lines().find(|l| l.starts_with("Network Segmentation")).unwrap();
    assert!(seg.trim_end().ends_with("New"), "{seg}");
}
