//! Writes the smallest enumerated Type I and Type IIA cores to `cores/`.

use gasket_lab::per2::{enumerate_small_cores, GasketType};

fn main() {
    let all = enumerate_small_cores(12).expect("within the enumeration cap");
    for (ty, name) in [(GasketType::I, "typeI_min"), (GasketType::IIA, "typeIIA_min")] {
        let e = all.iter().find(|e| e.gasket_type == ty).expect("a core of each type");
        let mut core = e.core.clone();
        core.name = name.to_string();
        let path = format!("{}/cores/{name}.json", env!("CARGO_MANIFEST_DIR"));
        std::fs::write(&path, serde_json::to_string_pretty(&core).unwrap() + "\n").unwrap();
        println!("{name}: {} vertices in G1, l = {}, q = {}", e.g1_vertices, e.l, e.q);
    }
}
