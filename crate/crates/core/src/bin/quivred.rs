fn main() {
    let (code, text) = quivred::cli::run(std::env::args_os());
    if code == 1 && !text.trim_start().starts_with('{') {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    std::process::exit(code);
}
