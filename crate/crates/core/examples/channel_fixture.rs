// Draw a seeded channel realization, inspect the cascade, and round-trip it
// through a JSON fixture.

use risync::ChannelRealization;

fn main() -> risync::Result<()> {
    // K = 3 surfaces of 4 x 2 elements, 10 paths toward the receiver
    let ch = ChannelRealization::draw(7, 3, 4, 2, 10);
    ch.validate()?;
    println!("K = {}, N = {}", ch.num_ris(), ch.num_elements());
    for (k, (eps, c)) in ch.eps.iter().zip(ch.cascade()).enumerate() {
        let gain: f64 = c.iter().map(|z| z.norm()).sum();
        println!("  surface {k}: offset {eps:+.4}  coherent gain {gain:.4}");
    }

    let dir = std::env::temp_dir().join("risync-example");
    std::fs::create_dir_all(&dir).map_err(|e| risync::Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let path = dir.join("channel.json");
    ch.save(&path)?;
    let back = ChannelRealization::load(&path)?;
    println!(
        "fixture {} reloads identically: {}",
        path.display(),
        back == ch
    );
    Ok(())
}
