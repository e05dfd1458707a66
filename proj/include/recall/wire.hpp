#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recall/environment.hpp"

namespace recall::env {

// Newline-delimited JSON protocol for attaching external environments.
// Requests: {id, op: "hello"|"reset"|"step", task?, action?}
// Replies:  {id, observation, done, reward} or {id, error}
// The hello exchange carries protocol_version, env_name, and step_budget.
inline constexpr int kWireProtocolVersion = 1;
inline constexpr int kDefaultWireTimeoutMs = 30000;

// One line in, one line out. recv_line returns nullopt on clean EOF and
// throws TimeoutError when the peer stays silent past timeout_ms.
class LineTransport {
public:
    virtual ~LineTransport() = default;
    virtual void send_line(const std::string& line) = 0;
    virtual std::optional<std::string> recv_line(int timeout_ms) = 0;
};

// Transport over a pair of file descriptors (socket, pipe). Owns and
// closes them.
class FdTransport : public LineTransport {
public:
    FdTransport(int read_fd, int write_fd);
    ~FdTransport() override;
    FdTransport(const FdTransport&) = delete;
    FdTransport& operator=(const FdTransport&) = delete;

    void send_line(const std::string& line) override;
    std::optional<std::string> recv_line(int timeout_ms) override;

    // idempotent early close (lets a child process see EOF before waitpid)
    void close_fds();

private:
    int read_fd_;
    int write_fd_;
    std::string buffer_;
};

// In-process peer: each sent line is handed to the handler, whose replies
// queue up for recv_line. An empty queue on recv_line means the peer kept
// silent, which surfaces as a timeout.
class LoopbackTransport : public LineTransport {
public:
    using Handler = std::function<std::vector<std::string>(const std::string&)>;
    explicit LoopbackTransport(Handler handler);

    void send_line(const std::string& line) override;
    std::optional<std::string> recv_line(int timeout_ms) override;

private:
    Handler handler_;
    std::deque<std::string> pending_;
};

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, int port,
                                           int timeout_ms = kDefaultWireTimeoutMs);

// Spawns argv as a child process and talks to its stdio.
std::unique_ptr<LineTransport> spawn_stdio_peer(const std::vector<std::string>& argv);

// ============================================================================
// Client side: proxy an external environment behind the Environment API.
// ============================================================================

class ExternalEnvironment : public Environment {
public:
    // Performs the hello handshake; env_name and step budget come from
    // the peer.
    explicit ExternalEnvironment(std::unique_ptr<LineTransport> transport,
                                 int timeout_ms = kDefaultWireTimeoutMs);

    const EnvironmentSpec& spec() const override { return spec_; }
    std::string reset(const memory::TaskSpec& task) override;
    StepResult step(const std::string& action) override;
    int steps_taken() const override { return steps_; }
    bool episode_active() const override { return active_; }

private:
    // sends one request and validates the matching reply
    std::string roundtrip(const std::string& op, const std::string& payload_json);

    std::unique_ptr<LineTransport> transport_;
    int timeout_ms_;
    EnvironmentSpec spec_;
    int64_t next_id_ = 1;
    int steps_ = 0;
    bool active_ = false;
};

// ============================================================================
// Server side: serve a local Environment to a remote agent until EOF.
// ============================================================================

void serve_environment(LineTransport& transport, Environment& environment);

// Handler form of the peer loop for LoopbackTransport.
LoopbackTransport::Handler environment_peer_handler(std::shared_ptr<Environment> environment);

}  // namespace recall::env
