pub fn run(_args: impl IntoIterator<Item = String>) -> i32 { 0 }
