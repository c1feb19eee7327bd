//! Records chat exchanges to a transcript, then answers the same requests
//! from the transcript alone.

use std::sync::Arc;

use serde_json::{json, Value};

use irbench::error::ProviderError;
use irbench::providers::{
    ChatParams, ChatProvider, HttpChat, ProviderConfig, RecordingTransport, ReplayTransport, Role, Transport,
    VirtualClock,
};

/// Stands in for a model server: replies with the prompt reversed.
struct Reverser;

impl Transport for Reverser {
    fn post_json(&self, _path: &str, body: &Value) -> Result<Value, ProviderError> {
        let prompt = body["messages"][0]["content"].as_str().unwrap_or_default();
        let reply: String = prompt.chars().rev().collect();
        Ok(json!({"choices": [{"message": {"content": reply}}]}))
    }
}

fn main() -> irbench::Result<()> {
    let dir = std::env::temp_dir().join("irbench-record-replay");
    std::fs::create_dir_all(&dir).map_err(|e| irbench::Error::io("creating temp dir", e))?;
    let path = dir.join("chat.jsonl");
    let _ = std::fs::remove_file(&path);
    let config = ProviderConfig::for_role(Role::Chat);
    let prompts = ["first prompt", "second prompt"];

    let recorder = Arc::new(RecordingTransport::with_sink(Arc::new(Reverser), &path)?);
    let live = HttpChat::with_transport(config.clone(), recorder, Arc::new(VirtualClock::new()))?;
    for p in prompts {
        println!("live:   {}", live.complete(p, &ChatParams::JUDGING)?);
    }

    let replay = HttpChat::with_transport(
        config,
        Arc::new(ReplayTransport::from_file(&path)?),
        Arc::new(VirtualClock::new()),
    )?;
    for p in prompts {
        println!("replay: {}", replay.complete(p, &ChatParams::JUDGING)?);
    }
    match replay.complete("never sent", &ChatParams::JUDGING) {
        Err(e) => println!("unrecorded request: {e}"),
        Ok(r) => println!("unexpected reply {r}"),
    }
    println!("transcript at {}", path.display());
    Ok(())
}
