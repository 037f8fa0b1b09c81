#include "geosacs/error.hpp"
#include "geosacs/server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

namespace geosacs::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// A slow reader loses state frames rather than growing without bound.
constexpr std::size_t kMaxQueuedFrames = 256;
// How long close handshakes may run at shutdown before sockets are dropped.
constexpr std::chrono::milliseconds kCloseGrace{250};

}  // namespace

class Connection;

struct Core {
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  asio::steady_timer timer{io};
  asio::steady_timer grace{io};
  std::optional<asio::signal_set> signals;

  session::Session session;
  ServerOptions options;
  session::CommandQueue inbox;
  std::vector<std::weak_ptr<Connection>> connections;
  std::ofstream log;

  std::atomic<std::size_t> tick_count{0};
  std::chrono::steady_clock::time_point epoch;
  std::chrono::nanoseconds period{};
  std::thread worker;
  std::mutex join_mu;

  Core(session::Session s, ServerOptions o) : session(std::move(s)), options(std::move(o)) {}

  void accept_next();
  void schedule_tick();
  void on_tick();
  void broadcast(std::shared_ptr<const std::string> frame);
  void shutdown();
  void run();
  void join();
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Core& server) : ws_(std::move(socket)), server_(server) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send(std::make_shared<const std::string>(hello_frame(self->server_.options.tick_hz)));
      self->send(std::make_shared<const std::string>(canal_frame(self->server_.session.canal())));
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> frame) {
    if (closing_ || close_after_flush_) return;
    if (queue_.size() >= kMaxQueuedFrames) return;
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (closing_) return;
    closing_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  // Only once the I/O thread has exited.
  void drop() {
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->on_message();
    });
  }

  void on_message() {
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    ClientFrame frame = parse_client_frame(text);
    if (frame.command) server_.inbox.push(*frame.command);
    if (!frame.error_code.empty()) send(std::make_shared<const std::string>(error_frame(frame.error_code, frame.detail)));
    if (frame.close) {
      close_after_flush_ = true;
      if (queue_.empty()) close();
      return;
    }
    read();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write();
      } else if (self->close_after_flush_) {
        self->close();
      }
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Core& server_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closing_ = false;
  bool close_after_flush_ = false;
};

void Core::accept_next() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    auto conn = std::make_shared<Connection>(std::move(socket), *this);
    std::erase_if(connections, [](const auto& w) { return w.expired(); });
    connections.push_back(conn);
    conn->start();
    accept_next();
  });
}

void Core::schedule_tick() {
  timer.expires_at(epoch + period * static_cast<long>(tick_count.load() + 1));
  timer.async_wait([this](beast::error_code ec) {
    if (ec) return;
    on_tick();
    schedule_tick();
  });
}

void Core::on_tick() {
  const auto pending = inbox.drain();
  const auto record = session.tick(pending);
  if (log.is_open()) log << session::to_log_line(record) << '\n' << std::flush;
  broadcast(std::make_shared<const std::string>(state_frame(session.state(), session.canal())));
  tick_count.fetch_add(1);
}

void Core::broadcast(std::shared_ptr<const std::string> frame) {
  for (auto& weak : connections) {
    if (auto conn = weak.lock()) conn->send(frame);
  }
}

void Core::shutdown() {
  beast::error_code ignored;
  acceptor.close(ignored);
  timer.cancel();
  if (signals) signals->cancel(ignored);
  bool any_open = false;
  for (auto& weak : connections) {
    if (auto conn = weak.lock()) {
      conn->close();
      any_open = true;
    }
  }
  if (!any_open) {
    io.stop();
    return;
  }
  grace.expires_after(kCloseGrace);
  grace.async_wait([this](beast::error_code) { io.stop(); });
}

void Core::run() {
  io.run();
  for (auto& weak : connections) {
    if (auto conn = weak.lock()) conn->drop();
  }
  connections.clear();
}

void Core::join() {
  std::lock_guard lock(join_mu);
  if (worker.joinable()) worker.join();
}

struct Server::Impl : Core {
  using Core::Core;
};

Server::Server(session::Session session, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {
  if (!(impl_->options.tick_hz > 0.0)) throw Error(ErrorCode::MalformedConfig, "tick_hz must be positive");
}

Server::~Server() {
  stop();
  wait();
}

void Server::start() {
  auto& im = *impl_;
  beast::error_code ec;
  const auto address = asio::ip::make_address(im.options.address, ec);
  if (ec) throw Error(ErrorCode::BindFailure, "bad address '" + im.options.address + "'");
  const tcp::endpoint endpoint{address, im.options.port};
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::BindFailure,
                im.options.address + ":" + std::to_string(im.options.port) + ": " + ec.message());
  }
  if (im.options.log_path) {
    im.log.open(*im.options.log_path, std::ios::out | std::ios::trunc);
    if (!im.log) throw Error(ErrorCode::Io, "cannot open log " + im.options.log_path->string());
  }
  if (im.options.handle_signals) {
    im.signals.emplace(im.io, SIGINT, SIGTERM);
    im.signals->async_wait([&im](beast::error_code ec, int) {
      if (!ec) im.shutdown();
    });
  }
  im.period = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(1.0 / im.options.tick_hz));
  im.epoch = std::chrono::steady_clock::now();
  im.accept_next();
  im.schedule_tick();
  im.worker = std::thread([&im] { im.run(); });
}

unsigned short Server::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

std::size_t Server::ticks() const { return impl_->tick_count.load(); }

void Server::stop() {
  auto& im = *impl_;
  asio::post(im.io, [&im] { im.shutdown(); });
}

void Server::wait() { impl_->join(); }

}  // namespace geosacs::server
