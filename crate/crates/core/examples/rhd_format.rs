//! The RHD1 block layout: write a frame record, dump its headers, and read
//! it back bit for bit.

use std::io::Cursor;

use radarsr::harness::format::{read_block, Block};
use radarsr::harness::{simulate_trajectory, DataConfig, FrameRecord};
use radarsr::sim::{EnvironmentKind, SimConfig};

fn main() -> radarsr::Result<()> {
    let sim = SimConfig::toy();
    let records = simulate_trajectory(EnvironmentKind::Same, 1, 2, 3, &sim, &DataConfig::default())?;
    let rec = &records[2];
    let mut bytes = Vec::new();
    rec.write_to(&mut bytes).map_err(|e| radarsr::Error::io("memory", e))?;
    println!("frame {} encodes to {} bytes", rec.index, bytes.len());

    let mut cursor = Cursor::new(&bytes);
    while (cursor.position() as usize) < bytes.len() {
        let at = cursor.position();
        let block: Block = read_block(&mut cursor)?;
        println!("  @{at:>6}: kind {:#06x} dims {:?}", block.kind, block.dims);
    }
    println!("header bytes: {:02x?}", &bytes[..16]);

    let back = FrameRecord::read_from(&mut Cursor::new(&bytes), rec.index, sim.max_range)?.expect("one record");
    println!("round trip identical: {}", back == *rec);
    Ok(())
}
