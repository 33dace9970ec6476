use mimo_jscc_sim::config::SweepConfig;

const BASE: &str = r#"
schemes = ["mux", "alamouti"]
nt = 2
nr_list = [1, 2]
snr_db_grid = [0.0, 10.0]
rho = "1/8"
image_dims = [3, 32, 32]
trials = 4
master_seed = 1
"#;

fn with(key: &str, value: &str) -> String {
    let mut found = false;
    let mut out: Vec<String> = BASE
        .lines()
        .map(|l| {
            if l.starts_with(&format!("{key} =")) {
                found = true;
                format!("{key} = {value}")
            } else {
                l.to_string()
            }
        })
        .collect();
    if !found {
        out.insert(1, format!("{key} = {value}"));
    }
    out.join("\n")
}

fn rejected(text: &str, field: &str) {
    let err = SweepConfig::from_toml_str(text).expect_err(text);
    assert_eq!(err.field, field, "{err}");
    assert!(err.to_string().contains(field));
}

#[test]
fn base_is_valid() {
    SweepConfig::from_toml_str(BASE).unwrap();
}

#[test]
fn invalid_configs_name_the_field() {
    rejected(&with("schemes", "[]"), "schemes");
    rejected(&with("schemes", r#"["qam"]"#), "schemes");
    rejected(&with("schemes", r#"["mux", "mux"]"#), "schemes");
    rejected(&with("nt", "3"), "nt"); // alamouti needs 2
    rejected(&with("schemes", r#"["ostbc3-r12"]"#), "nt");
    rejected(
        &with("nt", "0").replace(r#"["mux", "alamouti"]"#, r#"["mux"]"#),
        "nt",
    );
    rejected(&with("nr_list", "[]"), "nr_list");
    rejected(&with("nr_list", "[1, 0]"), "nr_list");
    rejected(&with("snr_db_grid", "[]"), "snr_db_grid");
    rejected(&with("snr_db_grid", "[10.0, 0.0]"), "snr_db_grid");
    rejected(&with("snr_db_grid", "[0.0, 0.0]"), "snr_db_grid");
    rejected(&with("snr_db_grid", "[0.0, nan]"), "snr_db_grid");
    rejected(&with("trials", "0"), "trials");
    rejected(&with("workers", "0"), "workers");
    rejected(&with("rho", r#""1/7""#), "rho"); // 3072/7 channel uses
    rejected(&with("rho", r#""0/8""#), "rho");
    rejected(&with("rho", r#""x""#), "rho");
    rejected(&with("rho", "[]"), "rho");
    rejected(&with("power", "0.0"), "power");
    rejected(&with("max_val", "-1.0"), "max_val");
    rejected(&with("source_variance", "0.0"), "source_variance");
    rejected(&with("image_dims", "[1, 1, 3]"), "image_dims");
    rejected(&with("source_n", "64"), "source_n"); // both sizings given
    rejected(
        &BASE.replace("image_dims = [3, 32, 32]", "source_n = 31"),
        "source_n",
    );
    rejected(&BASE.replace("image_dims = [3, 32, 32]", ""), "image_dims");
    rejected(&with("bogus_key", "1"), "toml");
    rejected("nt = ", "toml");
}

#[test]
fn block_divisibility_is_checked_per_scheme() {
    // k = 3072/64 = 48 uses: fine for rate-3/4 (4 slots) and rate-1/2 (8).
    let ok = BASE
        .replace(r#"["mux", "alamouti"]"#, r#"["ostbc3-r12", "ostbc3-r34"]"#)
        .replace("nt = 2", "nt = 3")
        .replace(r#""1/8""#, r#""1/64""#);
    SweepConfig::from_toml_str(&ok).unwrap();
    // k = 3072/512 = 6 uses: not a whole number of 4- or 8-slot blocks.
    rejected(&ok.replace(r#""1/64""#, r#""1/512""#), "rho");
}
