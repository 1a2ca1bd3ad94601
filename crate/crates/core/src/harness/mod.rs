//! Experiment runner behind the `cat0lab` binary: JSON configs in, run
//! records and CSV series out.

pub mod commands;
pub mod config;
pub mod record;

pub use commands::{run, Command};
pub use config::{default_point, ExperimentConfig, ModeName, OutputConfig, Params};
pub use record::{CommandOutput, RunRecord, RunStatus};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn drift_table_on_z() {
        let c = cfg(r#"{"group": {"kind": "lattice", "rank": 1}, "params": {"n_max": 10}}"#);
        let out = run(Command::Drift, &c, None).unwrap();
        let rows = out.record.payload["rows"].as_array().unwrap();
        assert_eq!(rows[3]["ln_exact"], "3/2");
        assert_eq!(out.record.payload["subadditive"], true);
        assert!(out.csv[0].1.starts_with("n,Ln,Ltilde,Ln_over_n,stderr\n"));
    }

    #[test]
    fn exact_payloads_are_reproducible() {
        let c = cfg(r#"{"group": {"kind": "free", "rank": 2}, "params": {"n_max": 6}}"#);
        let a = run(Command::Drift, &c, None).unwrap().record;
        let b = run(Command::Drift, &c, None).unwrap().record;
        assert_eq!(a.payload, b.payload);
        assert_eq!(a.config_hash, b.config_hash);
        assert_eq!(a.content_version, b.content_version);
    }

    #[test]
    fn conv_comb_on_z_holds() {
        let c = cfg(
            r#"{"group": {"kind": "lattice", "rank": 1},
                "params": {"n_max": 8, "coefficients": ["1/2", "1/2"]}}"#,
        );
        let out = run(Command::ConvComb, &c, None).unwrap();
        assert_eq!(out.record.status, RunStatus::Pass);
        assert_eq!(out.record.payload["factor_exact"], "5/2");
    }

    #[test]
    fn conv_comb_mass_must_be_one() {
        let c = cfg(
            r#"{"group": {"kind": "lattice", "rank": 1},
                "params": {"n_max": 4, "coefficients": [0.5, 0.25]}}"#,
        );
        assert!(matches!(run(Command::ConvComb, &c, None), Err(Error::Schema(_))));
    }

    #[test]
    fn operation_must_match() {
        let c = cfg(r#"{"operation": "shalom", "group": {"kind": "lattice", "rank": 1}, "params": {"n_max": 2}}"#);
        assert!(matches!(run(Command::Drift, &c, None), Err(Error::Schema(_))));
        assert_eq!(Command::from_name("conv_comb"), Some(Command::ConvComb));
    }

    #[test]
    fn fixed_point_rotation() {
        let c = cfg(
            r#"{"group": {"kind": "cyclic", "order": 4},
                "space": {"kind": "euclidean", "dim": 2},
                "action": {"kind": "generators", "images": [{"kind": "rotation", "turns": 0.25}]},
                "start": [1.0, 0.0]}"#,
        );
        let out = run(Command::FixedPoint, &c, None).unwrap();
        assert_eq!(out.record.payload["outcome"], "found");
    }

    #[test]
    fn grigorchuk_small_radius() {
        let c = cfg(r#"{"group": {"kind": "grigorchuk"}, "params": {"radius": 0}}"#);
        let out = run(Command::GrigorchukAudit, &c, None).unwrap();
        assert_eq!(out.record.payload["order_histogram"], serde_json::json!({"1": 1}));
        assert_eq!(out.record.status, RunStatus::Pass);

        let c = cfg(r#"{"group": {"kind": "grigorchuk"}, "params": {"radius": 2}}"#);
        let out = run(Command::GrigorchukAudit, &c, None).unwrap();
        let hist = out.record.payload["order_histogram"].as_object().unwrap();
        // ab has order 16, so radius 2 already reaches it
        let keys: Vec<&str> = hist.keys().map(String::as_str).collect();
        assert_eq!(keys, ["1", "16", "2", "4", "8"]);
        assert_eq!(out.record.status, RunStatus::Pass);

        let c = cfg(r#"{"group": {"kind": "grigorchuk"}, "params": {"radius": 3, "order_cap": 2}}"#);
        let out = run(Command::GrigorchukAudit, &c, None).unwrap();
        assert_eq!(out.record.status, RunStatus::Complete);
        assert!(!out.record.payload["exceeds_cap"].as_array().unwrap().is_empty());
    }

    #[test]
    fn space_check_on_a_tree() {
        let c = cfg(
            r#"{"space": {"kind": "star", "legs": 3},
                "params": {"triples": 300, "samples": 100}}"#,
        );
        let out = run(Command::SpaceCheck, &c, None).unwrap();
        assert_eq!(out.record.status, RunStatus::Pass);
    }
}
