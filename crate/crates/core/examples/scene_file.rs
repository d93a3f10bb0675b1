//! Scene documents: build a scene from JSON, reject a form that is not
//! contact, and write a deterministic report.

use reeb_holo::invariants::volume_x;
use reeb_holo::quadrature::QuadratureSpec;
use reeb_holo::report::to_json;
use reeb_holo::scene_file::SceneFile;

const SHELL: &str = r#"{"n":1, "domain":{"kind":"shell","r_in":1,"r_out":2},
    "form":{"kind":"conformal","base":{"kind":"darboux"},"exponent":"bump:0.2"}}"#;

const FLIPPED: &str = r#"{"n":1, "domain":{"kind":"ball","radius":1},
    "form":{"kind":"shifted","base":{"kind":"darboux"},"eta":"z","t":-2}}"#;

fn main() -> reeb_holo::Result<()> {
    let file = SceneFile::from_json(SHELL)?;
    let scene = file.build(false)?;
    let v = volume_x(&scene, &QuadratureSpec::default())?;
    print!("{}", to_json(&serde_json::json!({ "scene": file, "vol_X": v.value }))?);

    match SceneFile::from_json(FLIPPED)?.build(false) {
        Ok(_) => println!("flipped form accepted"),
        Err(e) => println!("flipped form rejected: {e}"),
    }
    Ok(())
}
