use std::fmt::Write;
use std::str::FromStr;

use super::{ActionTable, SchemeError, SchemeMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Csv,
}

impl FromStr for GraphFormat {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(Self::Dot),
            "csv" => Ok(Self::Csv),
            _ => Err(SchemeError::UnknownFormat(s.to_string())),
        }
    }
}

/// Which cycles of a table to draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleSelection {
    One(String),
    /// Every cycle in the table, overlaid.
    Union,
}

/// Directed cycle graph(s) of an action table.
///
/// DOT lists nodes in `j_set` order and edges `j -> c*j` grouped by cycle name.
/// CSV is the directed adjacency over `J` (row = source) with a header row and
/// label column; entries count parallel edges when cycles are overlaid.
pub fn export_table(
    table: &ActionTable,
    selection: &CycleSelection,
    format: GraphFormat,
) -> Result<String, SchemeError> {
    let names: Vec<&str> = match selection {
        CycleSelection::One(name) => {
            table.cycle(name)?;
            vec![name.as_str()]
        }
        CycleSelection::Union => table.cycle_names().collect(),
    };
    let js = table.j_set();
    let mut out = String::new();
    match format {
        GraphFormat::Dot => {
            let title = match selection {
                CycleSelection::One(name) => format!("cycle_{name}"),
                CycleSelection::Union => "cycles".to_string(),
            };
            writeln!(out, "digraph {title} {{").unwrap();
            for j in js {
                writeln!(out, "  \"{j}\";").unwrap();
            }
            for name in &names {
                for j in table.cycle(name)? {
                    let next = table.act(name, *j, 1)?;
                    writeln!(out, "  \"{j}\" -> \"{next}\" [label=\"{name}\"];").unwrap();
                }
            }
            out.push_str("}\n");
        }
        GraphFormat::Csv => {
            let index = |j: u64| js.iter().position(|&x| x == j).expect("member of J");
            let mut counts = vec![vec![0u32; js.len()]; js.len()];
            for name in &names {
                for &j in table.cycle(name)? {
                    counts[index(j)][index(table.act(name, j, 1)?)] += 1;
                }
            }
            out.push('j');
            for j in js {
                write!(out, ",{j}").unwrap();
            }
            out.push('\n');
            for (row, j) in counts.iter().zip(js) {
                write!(out, "{j}").unwrap();
                for c in row {
                    write!(out, ",{c}").unwrap();
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Undirected graph of one scheme class. CSV is the bare 0/1 matrix.
pub fn export_scheme(matrix: &SchemeMatrix, format: GraphFormat) -> String {
    let n = matrix.order();
    let e = matrix.entries();
    let mut out = String::new();
    match format {
        GraphFormat::Dot => {
            writeln!(out, "graph scheme_{n}_{} {{", matrix.class()).unwrap();
            for v in 0..n {
                writeln!(out, "  {v};").unwrap();
            }
            for x in 0..n {
                for y in x..n {
                    if e[(x, y)] != 0.0 {
                        writeln!(out, "  {x} -- {y};").unwrap();
                    }
                }
            }
            out.push_str("}\n");
        }
        GraphFormat::Csv => {
            for x in 0..n {
                let row: Vec<String> = (0..n).map(|y| format!("{}", e[(x, y)] as u8)).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
    }
    out
}
