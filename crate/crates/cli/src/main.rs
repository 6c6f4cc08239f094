fn main() {
    // Placeholder while the library takes shape.
    eprintln!("chebfit: not yet wired");
    std::process::exit(2);
}
