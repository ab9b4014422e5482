//! Text rendering of a DTSA run: Cycle, M1..Mn, CycleSum, Q_reg, A, Y, Q_next.

use std::fmt::Write;

use bitflux::adders::{dtsa_mac_out, dtsa_trace, emba_accumulate};
use bitflux::{Bitstream, Polarity};

/// Header, one row per cycle (numbered from 1), then the conservation line
/// and the binary readout.
pub fn render(streams: &[Bitstream], polarity: Polarity) -> bitflux::Result<String> {
    let rows = dtsa_trace(streams)?;
    let m = streams.len();
    let mut out = String::new();
    let mut header = vec!["Cycle".to_string()];
    header.extend((1..=m).map(|i| format!("M{i}")));
    header.extend(["CycleSum", "Q_reg", "A", "Y", "Q_next"].map(String::from));
    writeln!(out, "{}", header.join("\t")).unwrap();

    let mut y_ones = 0u32;
    for row in &rows {
        let mut cells = vec![(row.cycle + 1).to_string()];
        cells.extend(row.bits.iter().map(|&b| u8::from(b).to_string()));
        let s = &row.step;
        cells.extend([
            s.cycle_sum.to_string(),
            s.q_reg.to_string(),
            s.a.to_string(),
            u8::from(s.y).to_string(),
            s.q_next.to_string(),
        ]);
        writeln!(out, "{}", cells.join("\t")).unwrap();
        y_ones += s.y as u32;
    }

    let remainder = rows.last().map_or(0, |r| r.step.q_next);
    let total = emba_accumulate(streams)?;
    writeln!(
        out,
        "total ones {total} = {m}*{y_ones} + {remainder} (M*#Y + remainder)"
    )
    .unwrap();
    let len = streams[0].len();
    writeln!(
        out,
        "MAC_out {:?}",
        dtsa_mac_out(y_ones, remainder, len, m, polarity)
    )
    .unwrap();
    Ok(out)
}
