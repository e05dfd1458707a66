// Minimal wire-protocol peer: serves the echo environment over stdio.
// Useful as a template for attaching real environments and as a test peer.

#include "recall/environment.hpp"
#include "recall/wire.hpp"

#include <unistd.h>

int main() {
    recall::env::EchoEnvironment environment;
    recall::env::FdTransport transport(::dup(STDIN_FILENO), ::dup(STDOUT_FILENO));
    recall::env::serve_environment(transport, environment);
    return 0;
}
