#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aurora/service.hpp"

namespace aurora {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

class WsClient : public std::enable_shared_from_this<WsClient> {
 public:
  WsClient(tcp::socket&& socket, Session& session) : ws_(std::move(socket)), session_(session) {}

  ~WsClient() { leave(); }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsClient::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    channel_ = std::make_shared<ClientChannel>(session_.client_queue_capacity());
    std::weak_ptr<WsClient> weak = shared_from_this();
    auto executor = ws_.get_executor();
    channel_->notify = [weak, executor] {
      net::post(executor, [weak] {
        if (auto self = weak.lock()) self->do_write();
      });
    };
    id_ = session_.connect(channel_);
    joined_ = true;
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsClient::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      leave();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    session_.handle_message(id_, text);
    do_read();
  }

  void do_write() {
    if (writing_ || !joined_) return;
    auto next = channel_->queue.try_pop();
    if (!next) return;
    writing_ = true;
    outgoing_ = std::move(*next);
    ws_.async_write(net::buffer(outgoing_), beast::bind_front_handler(&WsClient::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) {
      leave();
      return;
    }
    do_write();
  }

  void leave() {
    if (!joined_) return;
    joined_ = false;
    session_.disconnect(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  Session& session_;
  beast::flat_buffer buffer_;
  std::shared_ptr<ClientChannel> channel_;
  Session::ClientId id_ = 0;
  bool joined_ = false;
  bool writing_ = false;
  std::string outgoing_;
};

class HttpClient : public std::enable_shared_from_this<HttpClient> {
 public:
  HttpClient(tcp::socket&& socket, Session& session, std::string static_dir)
      : stream_(std::move(socket)), session_(session), static_dir_(std::move(static_dir)) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpClient::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpClient::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsClient>(stream_.release_socket(), session_)->run(std::move(req_));
      return;
    }
    respond();
  }

  void respond() {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::server, "aurora");

    std::string target(req_.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target.back() == '/') target += "index.html";

    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      res->result(http::status::method_not_allowed);
    } else if (static_dir_.empty() || target.find("..") != std::string::npos) {
      res->result(http::status::not_found);
    } else {
      const auto path = std::filesystem::path(static_dir_) / target.substr(1);
      std::ifstream in(path, std::ios::binary);
      if (!in || std::filesystem::is_directory(path)) {
        res->result(http::status::not_found);
      } else {
        std::ostringstream body;
        body << in.rdbuf();
        res->result(http::status::ok);
        res->set(http::field::content_type, std::string(mime_type(path)));
        if (req_.method() == http::verb::get) res->body() = body.str();
      }
    }
    if (res->result() != http::status::ok) {
      res->set(http::field::content_type, "text/plain");
      res->body() = std::string(res->reason()) + "\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  Session& session_;
  std::string static_dir_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  Session& session;
  ServerOptions options;
  std::unique_ptr<net::io_context> ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread thread;
  unsigned short bound_port = 0;

  void do_accept() {
    acceptor->async_accept(net::make_strand(*ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec == net::error::operation_aborted) return;
      if (!ec) std::make_shared<HttpClient>(std::move(socket), session, options.static_dir)->run();
      if (acceptor->is_open()) do_accept();
    });
  }
};

Server::Server(Session& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(Impl{session, std::move(options), nullptr, nullptr, {}, 0})) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->thread.joinable()) return;
  auto& im = *impl_;
  im.ioc = std::make_unique<net::io_context>(1);
  im.acceptor = std::make_unique<tcp::acceptor>(*im.ioc);

  beast::error_code ec;
  const auto address = net::ip::make_address(im.options.address, ec);
  if (ec) throw PreconditionError("invalid listen address '" + im.options.address + "'");
  const tcp::endpoint endpoint(address, im.options.port);
  im.acceptor->open(endpoint.protocol(), ec);
  if (!ec) im.acceptor->set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor->bind(endpoint, ec);
  if (ec == net::error::address_in_use || ec == net::error::access_denied) {
    im.acceptor.reset();
    im.ioc.reset();
    throw PortInUseError("cannot listen on " + im.options.address + ":" + std::to_string(im.options.port) + ": " +
                         ec.message());
  }
  if (!ec) im.acceptor->listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    im.acceptor.reset();
    im.ioc.reset();
    throw Error("cannot listen on " + im.options.address + ":" + std::to_string(im.options.port) + ": " +
                ec.message());
  }
  im.bound_port = im.acceptor->local_endpoint().port();
  im.do_accept();
  im.thread = std::thread([&im] { im.ioc->run(); });
}

void Server::stop() {
  auto& im = *impl_;
  if (!im.thread.joinable()) return;
  net::post(*im.ioc, [&im] {
    beast::error_code ignored;
    im.acceptor->close(ignored);
    im.ioc->stop();
  });
  im.thread.join();
  // Destroying the context releases pending handlers, which disconnects clients.
  im.acceptor.reset();
  im.ioc.reset();
}

unsigned short Server::port() const { return impl_->bound_port; }

}  // namespace aurora
