//! Ask an OpenAI-compatible endpoint to refactor s241.
//!
//! cargo run --example http_backend -- http://localhost:8000/v1 qwen2.5-coder-7b
//! The bearer token is read from REMARK_FORGE_API_KEY.

use remark_forge::agent::{build_prompt, extract_code, AgentBackend, CompletionRequest, HttpBackend, HttpConfig};
use remark_forge::dependence::precise_remark_set;
use remark_forge::kernel::Kernel;

fn main() {
    let mut args = std::env::args().skip(1);
    let (Some(endpoint), Some(model)) = (args.next(), args.next()) else {
        eprintln!("usage: http_backend <endpoint> <model>");
        std::process::exit(2);
    };
    let k = Kernel::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/kernels/s241.c")).unwrap();
    let backend = HttpBackend::new(HttpConfig { endpoint, model, retries: 3, timeout_secs: 300 }).unwrap();
    let req = CompletionRequest {
        messages: build_prompt(&k, Some(&precise_remark_set(&k)), None),
        temperature: 0.2,
        seed: Some(1),
        tag: None,
    };
    match backend.complete(&req) {
        Ok(reply) => println!("{}", extract_code(&reply).unwrap_or(reply)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(4);
        }
    }
}
