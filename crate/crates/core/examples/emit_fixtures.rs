//! Regenerates `tests/fixtures/oracle.json` from the Monte Carlo estimators.
//!
//! Run with `cargo run --release --example emit_fixtures`.

use dualmix::oracle::{
    mc_dual_mixed_volume, mc_section_dual_mixed_volume, mc_section_volume, mc_sphere_integrate,
    FixtureRecord,
};
use dualmix::starbody::{BodyExpr, BumpTerm};
use serde_json::json;

const SAMPLES: usize = 1_000_000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ellipsoid = BodyExpr::ellipsoid(&[1.0, 1.0, 2.0])?;
    let bump = BodyExpr::bump(
        1.0,
        vec![BumpTerm {
            coeff: 0.3,
            direction: vec![0.0, 0.0, 1.0],
            half_power: 2,
        }],
    )?;
    let ball = BodyExpr::unit_ball();
    let diagonal = vec![1.0 / 3f64.sqrt(); 3];
    let tilted = vec![0.6, 0.0, 0.8];

    let records = vec![
        FixtureRecord::new(
            "sphere_integral_exp_u3",
            json!({"m": 2, "integrand": "exp(u3)"}),
            &mc_sphere_integrate(|u| Ok(u[2].exp()), 2, SAMPLES, 1)?,
        ),
        FixtureRecord::new(
            "section_volume",
            json!({"body": {"ellipsoid": {"axes": [1, 1, 2]}}, "u": diagonal}),
            &mc_section_volume(&ellipsoid, &diagonal, SAMPLES, 2)?,
        ),
        FixtureRecord::new(
            "section_dual_mixed_volume",
            json!({
                "bodies": [
                    {"ellipsoid": {"axes": [1, 1, 2]}},
                    {"bump": {"c0": 1, "terms": [{"c": 0.3, "v": [0, 0, 1], "m": 2}]}}
                ],
                "u": tilted
            }),
            &mc_section_dual_mixed_volume(&[ellipsoid.clone(), bump.clone()], &tilted, SAMPLES, 3)?,
        ),
        FixtureRecord::new(
            "dual_mixed_volume",
            json!({
                "bodies": [
                    {"ellipsoid": {"axes": [1, 1, 2]}},
                    {"bump": {"c0": 1, "terms": [{"c": 0.3, "v": [0, 0, 1], "m": 2}]}},
                    {"ball": {"r": 1}}
                ]
            }),
            &mc_dual_mixed_volume(&[ellipsoid, bump, ball], SAMPLES, 4)?,
        ),
    ];
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/oracle.json");
    std::fs::create_dir_all(std::path::Path::new(path).parent().unwrap())?;
    let mut text = serde_json::to_string_pretty(&records)?;
    text.push('\n');
    std::fs::write(path, text)?;
    println!("wrote {} records to {path}", records.len());
    Ok(())
}
