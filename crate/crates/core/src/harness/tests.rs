use super::*;

fn run(name: &str) -> RunReport {
    let cfg = bundled_scenario(name).unwrap().unwrap();
    run_scenario(&cfg, None, RunOptions::default()).unwrap()
}

fn fetch<'a>(s: &'a Summary, consumer: &str, at_ms: u64) -> &'a FetchReport {
    s.fetches
        .iter()
        .find(|f| f.consumer == consumer && f.at_ms == at_ms)
        .unwrap()
}

#[test]
fn figure_sequence_hits_the_producer_once() {
    let s = run("figure_sequence").summary;
    assert_eq!(s.fetch_successes, 2);
    assert_eq!(s.producer_interests, 1);
    assert_eq!(s.cache_hits, 1);
    assert!(s.conserved);
}

#[test]
fn replays_succeed_only_across_caches_inside_the_window() {
    let same = run("replay_same_path").summary;
    assert_eq!(same.fetch_successes, 100);
    assert_eq!(same.attack_success["replay_same_path"], 0);
    assert_eq!(
        same.attacks
            .iter()
            .map(|a| a.drops["duplicate_nonce"])
            .sum::<u64>(),
        100
    );

    let cross = run("replay_cross_path").summary;
    assert_eq!(cross.attack_success["replay_cross_path"], 1);
    assert_eq!(cross.attacks[0].delivered, 1);
    assert_eq!(cross.attacks[1].delivered, 0);
    assert_eq!(cross.attacks[1].drops["stale_timestamp"], 1);
}

#[test]
fn multi_group_members_read_and_outsiders_do_not() {
    let s = run("multi_group").summary;
    for c in ["emp", "con"] {
        assert!(
            s.fetches
                .iter()
                .filter(|f| f.consumer == c)
                .all(|f| f.outcome == "served"),
            "{:?}",
            s.fetches
        );
    }
    let guest: Vec<_> = s.fetches.iter().filter(|f| f.consumer == "guest").collect();
    assert_eq!(
        guest.iter().filter(|f| f.outcome == "served").count(),
        1,
        "only the public item: {guest:?}"
    );
    // The shared hash name is one cache entry for both groups; encrypted
    // names differ per group. Every guest interest reaches the producer.
    assert_eq!(s.producer_interests, 2 + 1 + 3);
}

#[test]
fn mode_matrix_field_presence() {
    let s = run("mode_matrix").summary;
    assert_eq!(s.fetch_successes, 6);
    let row = |m: &str| s.mode_report.iter().find(|r| r.mode == m).unwrap();
    let o = row("obfuscate_only");
    assert!(
        o.name_obfuscated
            && o.has_group_id
            && !o.has_authenticator
            && o.content_keys == 0
            && o.fetched_ok
    );
    let f = row("full");
    assert!(
        f.name_obfuscated
            && f.has_group_id
            && f.has_authenticator
            && f.content_keys == 1
            && f.fetched_ok
    );
    let a = row("auth_only");
    assert!(
        !a.name_obfuscated
            && a.has_group_id
            && a.has_authenticator
            && a.content_keys == 1
            && a.fetched_ok
    );
}

#[test]
fn revocation_takes_effect_when_the_cached_copy_expires() {
    let s = run("revocation_expiry").summary;
    assert_eq!(s.stale_cache_hits, 0);
    assert_eq!(fetch(&s, "k1", 500).outcome, "served");
    // The cached copy still lists the revoked group's key.
    assert_eq!(fetch(&s, "k2", 1500).outcome, "served");
    let late = fetch(&s, "k1", 2500);
    assert_eq!(
        (late.outcome.as_str(), late.node.as_deref()),
        ("dropped", Some("p"))
    );
    assert_eq!(late.reason.as_deref(), Some("group_not_authorized"));
    assert_eq!(fetch(&s, "s1", 3100).outcome, "served");
    // Recached without the revoked group's key.
    let cached = fetch(&s, "k2", 3200);
    assert_eq!(
        (cached.outcome.as_str(), cached.node.as_deref()),
        ("dropped", Some("r"))
    );
    assert_eq!(cached.reason.as_deref(), Some("unknown_group_key"));
}

#[test]
fn summary_counts_reconcile_with_the_log() {
    for name in ["figure_sequence", "forgery", "revocation_expiry"] {
        let r = run(name);
        let log = crate::simnet::log::parse(&r.log_text()).unwrap();
        let mut drops: BTreeMap<String, u64> = BTreeMap::new();
        for rec in log.iter().filter(|l| l.kind == LogKind::Drop) {
            *drops.entry(rec.reason.clone()).or_default() += 1;
        }
        assert_eq!(drops, r.summary.drop_events, "{name}");
        let hits = log.iter().filter(|l| l.kind == LogKind::CacheHit).count() as u64;
        assert_eq!(hits, r.summary.cache_hits, "{name}");
        assert_eq!(log.len(), r.summary.log_lines, "{name}");
    }
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled_scenario("figure_sequence").unwrap().unwrap();
    run_scenario(&cfg, Some(dir.path()), RunOptions::default()).unwrap();
    for f in [
        "emission.log",
        "metrics.csv",
        "summary.json",
        "overhead.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 4);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["producer_interests"], 1);
}

#[test]
fn sweep_points_do_not_depend_on_threading() {
    let mut cfg = bundled_scenario("service_rate_sweep").unwrap().unwrap();
    let sweep = cfg.sweep.as_mut().unwrap();
    sweep.deltas = vec![0.0, 1.0];
    sweep.interests = 300;
    let a = run_scenario(&cfg, None, RunOptions { parallel: false }).unwrap();
    let b = run_scenario(&cfg, None, RunOptions { parallel: true }).unwrap();
    assert_eq!(a.log_text(), b.log_text());
    assert_eq!(a.summary.sweep, b.summary.sweep);
    assert_eq!(a.summary.sweep.len(), 2);
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(HarnessError::Validation(vec![]).exit_code(), 2);
    assert_eq!(
        HarnessError::Sim(SimError::Invariant(String::new())).exit_code(),
        3
    );
}
