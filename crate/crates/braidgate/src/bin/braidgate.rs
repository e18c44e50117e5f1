fn main() {
    eprintln!("braidgate CLI is not wired up yet");
    std::process::exit(1);
}
