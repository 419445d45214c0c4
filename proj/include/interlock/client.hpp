#pragma once

#include <interlock/policy.hpp>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace interlock {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One request line out, one response line back. Implementations own the
// connection; a transport serves a single client sequentially.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual std::string roundtrip(const std::string& line) = 0;
};

namespace detail {

inline void write_line(int fd, const std::string& line) {
    std::string buf = line;
    buf += '\n';
    std::size_t off = 0;
    while (off < buf.size()) {
        ssize_t n = ::write(fd, buf.data() + off, buf.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw PolicyUnavailable(std::string("write failed: ") + std::strerror(errno));
        }
        off += std::size_t(n);
    }
}

// Reads until '\n' with a deadline; leftover bytes stay in `carry` for the
// next call.
inline std::string read_line(int fd, int timeout_ms, std::string& carry) {
    for (;;) {
        if (auto pos = carry.find('\n'); pos != std::string::npos) {
            std::string line = carry.substr(0, pos);
            carry.erase(0, pos + 1);
            return line;
        }
        pollfd pfd{fd, POLLIN, 0};
        int rc = ::poll(&pfd, 1, timeout_ms);
        if (rc == 0) throw PolicyUnavailable("policy endpoint timed out");
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw PolicyUnavailable(std::string("poll failed: ") + std::strerror(errno));
        }
        char buf[4096];
        ssize_t n = ::read(fd, buf, sizeof(buf));
        if (n == 0) throw ProtocolError("policy endpoint closed the connection");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw PolicyUnavailable(std::string("read failed: ") + std::strerror(errno));
        }
        carry.append(buf, std::size_t(n));
    }
}

}  // namespace detail

// Runs `sh -c command` and speaks the newline-delimited protocol over its
// standard streams.
class SubprocessTransport : public Transport {
  public:
    explicit SubprocessTransport(const std::string& command, int timeout_ms = 30000)
        : timeout_ms_(timeout_ms) {
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
            throw PolicyUnavailable("pipe() failed");
        pid_ = ::fork();
        if (pid_ < 0) throw PolicyUnavailable("fork() failed");
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
            _exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
        ::signal(SIGPIPE, SIG_IGN);
    }

    ~SubprocessTransport() override {
        if (in_fd_ >= 0) ::close(in_fd_);
        if (out_fd_ >= 0) ::close(out_fd_);
        if (pid_ > 0) {
            ::kill(pid_, SIGTERM);
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    SubprocessTransport(const SubprocessTransport&) = delete;
    SubprocessTransport& operator=(const SubprocessTransport&) = delete;

    std::string roundtrip(const std::string& line) override {
        detail::write_line(in_fd_, line);
        return detail::read_line(out_fd_, timeout_ms_, carry_);
    }

  private:
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    int timeout_ms_;
    std::string carry_;
};

class TcpTransport : public Transport {
  public:
    TcpTransport(const std::string& host, int port, int timeout_ms = 30000)
        : timeout_ms_(timeout_ms) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* result = nullptr;
        if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &result) != 0)
            throw PolicyUnavailable("cannot resolve policy endpoint " + host);
        int fd = -1;
        for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
            fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        ::freeaddrinfo(result);
        if (fd < 0) throw PolicyUnavailable("cannot connect to " + host + ":" + std::to_string(port));
        fd_ = fd;
        ::signal(SIGPIPE, SIG_IGN);
    }

    ~TcpTransport() override {
        if (fd_ >= 0) ::close(fd_);
    }

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    std::string roundtrip(const std::string& line) override {
        detail::write_line(fd_, line);
        return detail::read_line(fd_, timeout_ms_, carry_);
    }

  private:
    int fd_ = -1;
    int timeout_ms_;
    std::string carry_;
};

// Policy served by an external process. Requests carry the rendered prompt
// plus the serialized observations in <image> order; responses must echo the
// id and contain exactly one well-formed action. Anything else raises; there
// is no fallback action.
class ExternalPolicy : public Policy {
  public:
    explicit ExternalPolicy(std::unique_ptr<Transport> transport)
        : transport_(std::move(transport)) {}

    RankedActions propose(const ProposalRequest& req, int k) override {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        Json request{{"id", next_id_},
                     {"kind", "propose"},
                     {"prompt", render_prompt(req)},
                     {"observations", Json::array({to_json(req.goal), to_json(req.current)})}};
        Action a = exchange(request, req.current);
        return RankedActions{{a}};
    }

    Action reflect(const ReflectionRequest& req) override {
        Json request{{"id", next_id_},
                     {"kind", "reflect"},
                     {"prompt", render_prompt(req)},
                     {"observations", Json::array({to_json(req.goal), to_json(req.current),
                                                   to_json(req.future)})}};
        return exchange(request, req.current);
    }

  private:
    Action exchange(const Json& request, const Observation& current) {
        const std::int64_t id = next_id_++;
        std::string reply = transport_->roundtrip(canonical(request));
        Json response;
        try {
            response = Json::parse(reply);
        } catch (const Json::parse_error& e) {
            throw ProtocolError(std::string("response is not valid JSON: ") + e.what());
        }
        if (!response.contains("id") || response.at("id").get<std::int64_t>() != id)
            throw ProtocolError("response id does not match request id");
        if (!response.contains("action") || !response.at("action").is_string())
            throw ProtocolError("response lacks an action string");
        return observation_grammar(current).parse(response.at("action").get<std::string>());
    }

    std::unique_ptr<Transport> transport_;
    std::int64_t next_id_ = 1;
};

}  // namespace interlock
