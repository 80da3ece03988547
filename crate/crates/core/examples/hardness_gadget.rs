//! Three-dimensional matching to all-cut instances, checked against exhaustive search.

use cmaxcut::forge::{gadget_from_3dm, gen_3dm_with, Planting};
use cmaxcut::io::format_instance;
use cmaxcut::io::InstanceFile;
use cmaxcut::oracle::{oracle_all_cut_decision, OracleLimits};

fn main() -> cmaxcut::error::Result<()> {
    let limits = OracleLimits::default();
    for (size, extras, planting, seed) in [(2, 1, Planting::Planted, 1), (2, 1, Planting::RemoveOne, 1), (3, 2, Planting::RemoveOne, 5)] {
        let (tdm, matching) = gen_3dm_with(size, extras, planting, seed)?;
        let gadget = gadget_from_3dm(&tdm)?;
        let all_cut = oracle_all_cut_decision(&gadget, &limits)?;
        println!(
            "{:?}: perfect matching {matching}, all-cut set {all_cut} ({} vertices, {} parts)",
            tdm.triples,
            gadget.graph().n(),
            gadget.num_parts()
        );
    }
    let (tdm, _) = gen_3dm_with(1, 0, Planting::Planted, 0)?;
    print!("{}", format_instance(&InstanceFile::new(gadget_from_3dm(&tdm)?)));
    Ok(())
}
