//! Text and JSON instance formats, including a matroid section.

use cmaxcut::io::{format_instance, parse_instance};

const TEXT: &str = "\
# 4-cycle, one vertex from each side
4 4 2
0 1 1
1 2 1
2 3 1
3 0 1
2 1 0 2
2 1 1 3
matroid partition 2
2 1 0 2
2 1 1 3
";

fn main() -> cmaxcut::error::Result<()> {
    let file = parse_instance(TEXT)?;
    println!("{}", serde_json::to_string_pretty(&file)?);
    print!("{}", format_instance(&file.normalized()?));
    match parse_instance("2 1 1\n0 7 1\n2 1 0 1\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
