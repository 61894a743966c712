//! Output plumbing: CSV tables, a dependency-free SVG line chart, and the
//! binary dump format for sieve tables.

use std::io::{self, Read, Write};

use crate::coprime_set::Variant;
use crate::error::{Error, Result};
use crate::semigroup::SemigroupEnumeration;
use crate::sieve::{BitPlane, SieveTable};

/// Writes rows as plain comma-separated lines. Values are numeric or
/// slash/space-joined tokens, so no quoting is ever needed.
pub fn write_csv<W: Write>(
    w: &mut W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// CSV rows for a semigroup enumeration: the element and its exponent
/// vector as space-joined `generator/exponent` pairs.
pub fn semigroup_csv<W: Write>(w: &mut W, enumeration: &SemigroupEnumeration) -> io::Result<()> {
    let rows = enumeration.iter_with_exponents().map(|(el, exps)| {
        let vector = exps
            .iter()
            .map(|&(i, e)| format!("{}/{}", enumeration.generators()[i as usize], e))
            .collect::<Vec<_>>()
            .join(" ");
        vec![el.to_string(), vector]
    });
    write_csv(w, &["element", "exponents"], rows)
}

/// CSV rows for a sieve table: n, both counts, the sign, and the composite
/// part when the plane was computed.
pub fn sieve_table_csv<W: Write>(w: &mut W, table: &SieveTable) -> io::Result<()> {
    let with_c_part = table.c_part_plane().is_some();
    let header: &[&str] = if with_c_part {
        &["n", "omega", "big_omega", "lambda", "n_c"]
    } else {
        &["n", "omega", "big_omega", "lambda"]
    };
    let rows = (table.lo()..=table.hi()).map(|n| {
        let mut row = vec![
            n.to_string(),
            table.omega_at(n).to_string(),
            table.big_omega_at(n).to_string(),
            table.lambda_at(n).to_string(),
        ];
        if let Some(c) = table.c_part_at(n) {
            row.push(c.to_string());
        }
        row
    });
    write_csv(w, header, rows)
}

// ---------------------------------------------------------------------------
// Binary dump
// ---------------------------------------------------------------------------

const DUMP_MAGIC: &[u8; 4] = b"LLSV";
const DUMP_VERSION: u32 = 1;

fn variant_code(v: Variant) -> u8 {
    match v {
        Variant::Omega => 0,
        Variant::BigOmega => 1,
    }
}

/// Dump layout, all little-endian: magic `LLSV`, version u32, lo u64,
/// hi u64, variant u8, then the bit-packed sign plane (ceil(len/8) bytes,
/// LSB-first, set bit = sign -1), then the two u8 count planes.
pub fn write_sieve_dump<W: Write>(w: &mut W, table: &SieveTable) -> io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&table.lo().to_le_bytes())?;
    w.write_all(&table.hi().to_le_bytes())?;
    w.write_all(&[variant_code(table.variant())])?;
    let n_bytes = table.len().div_ceil(8);
    let mut packed = Vec::with_capacity(n_bytes);
    'outer: for word in table.parity_plane().words() {
        for b in word.to_le_bytes() {
            if packed.len() == n_bytes {
                break 'outer;
            }
            packed.push(b);
        }
    }
    packed.resize(n_bytes, 0);
    w.write_all(&packed)?;
    w.write_all(table.omega_plane())?;
    w.write_all(table.big_omega_plane())?;
    Ok(())
}

/// Reads a dump written by `write_sieve_dump`. The composite-part plane is
/// not part of the format.
pub fn read_sieve_dump<R: Read>(r: &mut R) -> Result<SieveTable> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::BadParams("not a sieve dump (bad magic)".into()));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != DUMP_VERSION {
        return Err(Error::BadParams(format!(
            "unsupported dump version {version}"
        )));
    }
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let lo = u64::from_le_bytes(u64buf);
    r.read_exact(&mut u64buf)?;
    let hi = u64::from_le_bytes(u64buf);
    if lo < 1 || lo > hi {
        return Err(Error::BadParams(format!("bad dump range [{lo}, {hi}]")));
    }
    let mut vbuf = [0u8; 1];
    r.read_exact(&mut vbuf)?;
    let variant = match vbuf[0] {
        0 => Variant::Omega,
        1 => Variant::BigOmega,
        other => {
            return Err(Error::BadParams(format!("unknown variant code {other}")));
        }
    };
    let len = (hi - lo + 1) as usize;
    let mut packed = vec![0u8; len.div_ceil(8)];
    r.read_exact(&mut packed)?;
    let mut words = vec![0u64; len.div_ceil(64)];
    for (i, chunk) in packed.chunks(8).enumerate() {
        let mut wbuf = [0u8; 8];
        wbuf[..chunk.len()].copy_from_slice(chunk);
        words[i] = u64::from_le_bytes(wbuf);
    }
    let parity = BitPlane::from_words(len, words);
    let mut omega = vec![0u8; len];
    r.read_exact(&mut omega)?;
    let mut big_omega = vec![0u8; len];
    r.read_exact(&mut big_omega)?;
    SieveTable::from_raw_parts(lo, hi, variant, omega, big_omega, parity)
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

/// One named polyline.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// A minimal line chart: axes, ticks, one polyline with point markers per
/// series, and a legend. Pure string assembly, no drawing dependency.
pub fn svg_line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if all.is_empty() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if (x_max - x_min).abs() < f64::MIN_POSITIVE {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max - y_min).abs() < f64::MIN_POSITIVE {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" \
         viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        SVG_WIDTH / 2.0,
        escape(title)
    ));

    // axes
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    svg.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{:.1}\" x2=\"{x0:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n",
        MARGIN_TOP
    ));

    // ticks
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x_min + t * (x_max - x_min);
        let xp = sx(xv);
        svg.push_str(&format!(
            "<line x1=\"{xp:.1}\" y1=\"{y0:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 20.0,
            tick_label(xv)
        ));
        let yv = y_min + t * (y_max - y_min);
        let yp = sy(yv);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{x0:.1}\" y2=\"{yp:.1}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            x0 - 9.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        SVG_HEIGHT - 14.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if s.points.len() > 1 {
            let pts = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect::<Vec<_>>()
                .join(" ");
            svg.push_str(&format!(
                "<polyline points=\"{pts}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
            ));
        }
        for &(x, y) in s.points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            MARGIN_LEFT + plot_w - 150.0,
            MARGIN_TOP + 16.0 * (si as f64 + 1.0),
            escape(s.name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coprime_set::{builtin_family, FamilySpec};
    use crate::sieve::sieve_range;

    #[test]
    fn csv_shapes() {
        let mut buf = Vec::new();
        write_csv(
            &mut buf,
            &["x", "value"],
            vec![vec!["1".to_string(), "0.5".to_string()]].into_iter(),
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,value\n1,0.5\n");
    }

    #[test]
    fn semigroup_csv_format() {
        let e = crate::semigroup::enumerate(&[6, 35], 250).unwrap();
        let mut buf = Vec::new();
        semigroup_csv(&mut buf, &e).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "element,exponents");
        assert_eq!(lines[1], "1,");
        assert!(lines.contains(&"210,6/1 35/1"));
        assert!(lines.contains(&"216,6/3"));
    }

    #[test]
    fn dump_round_trip() {
        let set = builtin_family(&FamilySpec::AllPrimes, Variant::BigOmega, 1000).unwrap();
        for (lo, hi) in [(1u64, 1000u64), (17, 923), (64, 128)] {
            let table = sieve_range(&set, lo, hi).unwrap();
            let mut buf = Vec::new();
            write_sieve_dump(&mut buf, &table).unwrap();
            // header is 4 + 4 + 8 + 8 + 1 bytes, then the three planes
            let len = (hi - lo + 1) as usize;
            assert_eq!(buf.len(), 25 + len.div_ceil(8) + 2 * len);
            assert_eq!(&buf[..4], b"LLSV");
            let back = read_sieve_dump(&mut buf.as_slice()).unwrap();
            assert_eq!(back, table);
        }
    }

    #[test]
    fn dump_header_bytes_are_pinned() {
        let set = builtin_family(&FamilySpec::AllPrimes, Variant::BigOmega, 1000).unwrap();
        let table = sieve_range(&set, 17, 923).unwrap();
        let mut buf = Vec::new();
        write_sieve_dump(&mut buf, &table).unwrap();
        let mut expected = Vec::new();
        expected.extend_from_slice(b"LLSV");
        expected.extend_from_slice(&1u32.to_le_bytes());
        expected.extend_from_slice(&17u64.to_le_bytes());
        expected.extend_from_slice(&923u64.to_le_bytes());
        expected.push(1); // variant code for the multiplicity count
        assert_eq!(&buf[..25], &expected[..]);
        // first payload bit is the sign parity of n = 17 (prime, odd count)
        assert_eq!(buf[25] & 1, 1);
    }

    #[test]
    fn dump_rejects_garbage() {
        assert!(read_sieve_dump(&mut &b"NOPE"[..]).is_err());
        let mut buf = Vec::new();
        let set = builtin_family(&FamilySpec::AllPrimes, Variant::Omega, 64).unwrap();
        write_sieve_dump(&mut buf, &sieve_range(&set, 1, 64).unwrap()).unwrap();
        buf[4] = 9; // version lives right after the magic
        assert!(read_sieve_dump(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn svg_basics() {
        let pts = [(1.0, 0.5), (2.0, 0.25), (3.0, 0.1)];
        let svg = svg_line_chart(
            "decay",
            "log10 x",
            "|value|",
            &[Series {
                name: "mean",
                points: &pts,
            }],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("decay"));
        // single point still renders (marker, no polyline)
        let svg = svg_line_chart(
            "p",
            "x",
            "y",
            &[Series {
                name: "s",
                points: &[(1.0, 1.0)],
            }],
        );
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("<circle"));
    }
}
