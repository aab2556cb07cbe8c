fn main() {
    std::process::exit(remark_forge::cli::main());
}
