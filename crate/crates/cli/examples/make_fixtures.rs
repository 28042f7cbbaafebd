//! Regenerates the bundled POVM fixtures: `cargo run -p incompat-cli --example make_fixtures`.

use std::fs;
use std::path::Path;

use incompat::io;
use incompat::povm::{self, PauliAxis, Povm};

fn write(dir: &Path, name: &str, p: &Povm<f64>) {
    fs::write(dir.join(name), io::render(io::povm_to_json(p))).expect("fixture directory is writable");
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).expect("fixture directory is writable");
    for (name, axis) in [("sigmax", PauliAxis::X), ("sigmay", PauliAxis::Y), ("sigmaz", PauliAxis::Z)] {
        write(&dir, &format!("{name}.json"), &povm::pauli_povm(axis));
    }
    let [x, y, z] = povm::qubit_mub_triple::<f64>();
    for (k, p) in [x, y, z].iter().enumerate() {
        write(&dir, &format!("mub{k}.json"), p);
    }
    for d in 2..=5 {
        let (a, b) = povm::fourier_pair::<f64>(d).expect("d >= 2");
        write(&dir, &format!("fourier{d}_a.json"), &a);
        write(&dir, &format!("fourier{d}_b.json"), &b);
    }
    write(&dir, "trine.json", &povm::trine_qubit());
    for (name, axis) in [("noisy_x.json", PauliAxis::X), ("noisy_z.json", PauliAxis::Z)] {
        write(&dir, name, &povm::depolarize(&povm::pauli_povm(axis), 0.5).expect("eta in [0, 1]"));
    }
    let bad = r#"{
  "dim": 2,
  "effects": [
    {"label": "a", "matrix": [[[1.2, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]},
    {"label": "b", "matrix": [[[-0.2, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
  ]
}
"#;
    fs::write(dir.join("negative_effect.json"), bad).expect("fixture directory is writable");
}
