#include "recall/wire.hpp"

#include <csignal>
#include <cstring>
#include <mutex>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "recall/error.hpp"

namespace recall::env {

using nlohmann::ordered_json;

namespace {

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

// ============================================================================
// FdTransport
// ============================================================================

FdTransport::FdTransport(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {
    ignore_sigpipe_once();
}

FdTransport::~FdTransport() { close_fds(); }

void FdTransport::close_fds() {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = -1;
    write_fd_ = -1;
}

void FdTransport::send_line(const std::string& line) {
    std::string data = line;
    data.push_back('\n');
    size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::write(write_fd_, data.data() + sent, data.size() - sent);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("wire send failed: ") + std::strerror(errno));
        }
        sent += static_cast<size_t>(n);
    }
}

std::optional<std::string> FdTransport::recv_line(int timeout_ms) {
    while (true) {
        const auto newline = buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string line = buffer_.substr(0, newline);
            buffer_.erase(0, newline + 1);
            return line;
        }
        struct pollfd pfd {};
        pfd.fd = read_fd_;
        pfd.events = POLLIN;
        const int ready = ::poll(&pfd, 1, timeout_ms);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("wire poll failed: ") + std::strerror(errno));
        }
        if (ready == 0) {
            throw TimeoutError("peer silent past " + std::to_string(timeout_ms) + " ms");
        }
        char chunk[4096];
        const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("wire read failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (buffer_.empty()) return std::nullopt;  // clean EOF
            throw Error("peer closed the connection mid-line");
        }
        buffer_.append(chunk, static_cast<size_t>(n));
    }
}

// ============================================================================
// LoopbackTransport
// ============================================================================

LoopbackTransport::LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}

void LoopbackTransport::send_line(const std::string& line) {
    for (auto& reply : handler_(line)) {
        pending_.push_back(std::move(reply));
    }
}

std::optional<std::string> LoopbackTransport::recv_line(int timeout_ms) {
    if (pending_.empty()) {
        throw TimeoutError("loopback peer silent past " + std::to_string(timeout_ms) + " ms");
    }
    std::string line = std::move(pending_.front());
    pending_.pop_front();
    return line;
}

// ============================================================================
// Connectors
// ============================================================================

std::unique_ptr<LineTransport> connect_tcp(const std::string& host, int port,
                                           int timeout_ms) {
    ignore_sigpipe_once();
    struct addrinfo hints {};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* results = nullptr;
    const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &results);
    if (rc != 0) {
        throw Error("cannot resolve '" + host + "': " + gai_strerror(rc));
    }
    int fd = -1;
    std::string last_error = "no addresses";
    for (auto* ai = results; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_error = std::strerror(errno);
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            break;
        }
        last_error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(results);
    if (fd < 0) {
        throw Error("cannot connect to " + host + ":" + std::to_string(port) + ": " +
                    last_error);
    }
    (void)timeout_ms;  // per-message timeouts are enforced in recv_line
    return std::make_unique<FdTransport>(fd, fd);
}

namespace {

class StdioPeerTransport : public FdTransport {
public:
    StdioPeerTransport(int read_fd, int write_fd, pid_t pid)
        : FdTransport(read_fd, write_fd), pid_(pid) {}
    ~StdioPeerTransport() override {
        // close first so the child sees EOF and exits, then reap it
        close_fds();
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

private:
    pid_t pid_;
};

}  // namespace

std::unique_ptr<LineTransport> spawn_stdio_peer(const std::vector<std::string>& argv) {
    if (argv.empty()) {
        throw Error("spawn_stdio_peer: empty argv");
    }
    ignore_sigpipe_once();
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
        throw Error(std::string("pipe failed: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        throw Error(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    return std::make_unique<StdioPeerTransport>(from_child[0], to_child[1], pid);
}

// ============================================================================
// ExternalEnvironment (client)
// ============================================================================

ExternalEnvironment::ExternalEnvironment(std::unique_ptr<LineTransport> transport,
                                         int timeout_ms)
    : transport_(std::move(transport)), timeout_ms_(timeout_ms) {
    ordered_json hello;
    hello["id"] = 0;
    hello["op"] = "hello";
    hello["protocol_version"] = kWireProtocolVersion;
    transport_->send_line(hello.dump());
    const auto reply_line = transport_->recv_line(timeout_ms_);
    if (!reply_line) {
        throw ProtocolError("peer closed the connection during handshake");
    }
    ordered_json reply;
    try {
        reply = ordered_json::parse(*reply_line);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed handshake reply: ") + e.what());
    }
    if (reply.value("id", -1) != 0) {
        throw ProtocolError("handshake reply carries wrong request id");
    }
    const int version = reply.value("protocol_version", -1);
    if (version != kWireProtocolVersion) {
        throw ProtocolError("protocol version mismatch: peer speaks " +
                            std::to_string(version) + ", expected " +
                            std::to_string(kWireProtocolVersion));
    }
    spec_.env_name = reply.value("env_name", std::string("external"));
    spec_.step_budget = reply.value("step_budget", 1 << 20);
    spec_.description = "External environment '" + spec_.env_name + "' over the wire protocol.";
}

std::string ExternalEnvironment::roundtrip(const std::string& op,
                                           const std::string& payload_json) {
    const int64_t id = next_id_++;
    ordered_json request = ordered_json::parse(payload_json);
    request["id"] = id;
    request["op"] = op;
    transport_->send_line(request.dump());
    const auto reply_line = transport_->recv_line(timeout_ms_);
    if (!reply_line) {
        throw ProtocolError("peer closed the connection");
    }
    ordered_json reply;
    try {
        reply = ordered_json::parse(*reply_line);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed reply: ") + e.what());
    }
    if (!reply.contains("id") || reply["id"].get<int64_t>() != id) {
        throw ProtocolError("reply carries wrong request id (expected " + std::to_string(id) +
                            ")");
    }
    if (reply.contains("error")) {
        throw ProtocolError("peer error: " + reply["error"].get<std::string>());
    }
    return reply.dump();
}

std::string ExternalEnvironment::reset(const memory::TaskSpec& task) {
    ordered_json payload;
    payload["task"] = {{"id", task.id},
                       {"instruction", task.instruction},
                       {"env_name", task.env_name},
                       {"split", task.split},
                       {"fold", task.fold}};
    const auto reply = ordered_json::parse(roundtrip("reset", payload.dump()));
    steps_ = 0;
    active_ = true;
    try {
        return reply.at("observation").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("reset reply lacks an observation");
    }
}

Environment::StepResult ExternalEnvironment::step(const std::string& action) {
    if (!active_) {
        throw Error("step on a finished external episode");
    }
    ordered_json payload;
    payload["action"] = action;
    const auto reply = ordered_json::parse(roundtrip("step", payload.dump()));
    StepResult result;
    try {
        result.observation = reply.at("observation").get<std::string>();
        result.done = reply.at("done").get<bool>();
        result.reward = reply.at("reward").get<double>();
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("step reply lacks observation/done/reward");
    }
    ++steps_;
    if (result.done || steps_ >= spec_.step_budget) {
        active_ = false;
    }
    return result;
}

// ============================================================================
// Server side
// ============================================================================

namespace {

ordered_json handle_request(Environment& environment, const ordered_json& request) {
    ordered_json reply;
    reply["id"] = request.value("id", -1);
    const std::string op = request.value("op", std::string());
    try {
        if (op == "hello") {
            reply["protocol_version"] = kWireProtocolVersion;
            reply["env_name"] = environment.spec().env_name;
            reply["step_budget"] = environment.spec().step_budget;
        } else if (op == "reset") {
            memory::TaskSpec task;
            const auto& t = request.at("task");
            task.id = t.value("id", std::string());
            task.instruction = t.value("instruction", std::string());
            task.env_name = t.value("env_name", environment.spec().env_name);
            task.split = t.value("split", std::string("eval"));
            task.fold = t.value("fold", 0);
            reply["observation"] = environment.reset(task);
            reply["done"] = false;
            reply["reward"] = 0.0;
        } else if (op == "step") {
            const auto result = environment.step(request.at("action").get<std::string>());
            reply["observation"] = result.observation;
            reply["done"] = result.done;
            reply["reward"] = result.reward;
        } else {
            reply["error"] = "unknown op '" + op + "'";
        }
    } catch (const std::exception& e) {
        reply["error"] = e.what();
    }
    return reply;
}

}  // namespace

void serve_environment(LineTransport& transport, Environment& environment) {
    while (true) {
        std::optional<std::string> line;
        try {
            line = transport.recv_line(-1);  // serve until EOF, no deadline
        } catch (const TimeoutError&) {
            continue;
        }
        if (!line) return;
        if (line->empty()) continue;
        ordered_json request;
        try {
            request = ordered_json::parse(*line);
        } catch (const nlohmann::json::exception& e) {
            ordered_json reply;
            reply["id"] = -1;
            reply["error"] = std::string("malformed request: ") + e.what();
            transport.send_line(reply.dump());
            continue;
        }
        transport.send_line(handle_request(environment, request).dump());
    }
}

LoopbackTransport::Handler environment_peer_handler(std::shared_ptr<Environment> environment) {
    return [environment](const std::string& line) -> std::vector<std::string> {
        ordered_json request;
        try {
            request = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            ordered_json reply;
            reply["id"] = -1;
            reply["error"] = std::string("malformed request: ") + e.what();
            return {reply.dump()};
        }
        return {handle_request(*environment, request).dump()};
    };
}

}  // namespace recall::env
