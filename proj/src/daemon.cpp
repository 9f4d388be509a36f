/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/daemon.hpp>

#include <boost/asio.hpp>

#include <chrono>
#include <deque>
#include <fstream>
#include <future>
#include <thread>

#include <waku/log.hpp>
#include <waku/rpc.hpp>

namespace waku {

  namespace asio = boost::asio;
  using asio::ip::tcp;

  namespace {
    constexpr std::string_view kNodeKeyFile = "nodekey";
    constexpr std::string_view kPeerListSeqFile = "peer-list.seq";

    std::optional<std::string> read_file(const std::filesystem::path &p) {
      std::ifstream in(p);
      if (!in) {
        return std::nullopt;
      }
      std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) {
        s.pop_back();
      }
      return s;
    }

    void write_file(const std::filesystem::path &p, const std::string &content) {
      std::filesystem::create_directories(p.parent_path());
      std::ofstream out(p, std::ios::trunc);
      out << content << '\n';
      if (!out) {
        throw StartupError("cannot write " + p.string());
      }
    }

    class AsioRuntime final : public Runtime {
     public:
      explicit AsioRuntime(asio::io_context &io) : io_(io), rng_(std::random_device{}()) {}

      std::int64_t now() const override {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
      }

      TimerId schedule(std::int64_t delay_ns, std::string, std::function<void()> fn,
                       bool) override {
        auto id = next_++;
        auto timer = std::make_shared<asio::steady_timer>(io_);
        timer->expires_after(std::chrono::nanoseconds(std::max<std::int64_t>(delay_ns, 0)));
        timers_[id] = timer;
        timer->async_wait([this, id, fn = std::move(fn)](const boost::system::error_code &ec) {
          if (ec || timers_.erase(id) == 0) {
            return;
          }
          fn();
        });
        return id;
      }

      void cancel(TimerId id) override {
        auto it = timers_.find(id);
        if (it != timers_.end()) {
          it->second->cancel();
          timers_.erase(it);
        }
      }

      std::mt19937_64 &rng() override {
        return rng_;
      }

     private:
      asio::io_context &io_;
      std::mt19937_64 rng_;
      TimerId next_ = 1;
      std::map<TimerId, std::shared_ptr<asio::steady_timer>> timers_;
    };

    class TcpLink final : public Link, public std::enable_shared_from_this<TcpLink> {
     public:
      TcpLink(tcp::socket socket, Node &node) : socket_(std::move(socket)), node_(node) {}

      void begin(ConnectionId cid, std::optional<PeerId> expected) {
        cid_ = cid;
        expected_ = std::move(expected);
        read();
      }

      void send(Bytes bytes) override {
        if (closed_) {
          return;
        }
        out_.push_back(std::move(bytes));
        if (out_.size() == 1) {
          write();
        }
      }

      void close() override {
        if (std::exchange(closed_, true)) {
          return;
        }
        boost::system::error_code ec;
        socket_.shutdown(tcp::socket::shutdown_both, ec);
        socket_.close(ec);
      }

     private:
      void read() {
        socket_.async_read_some(
            asio::buffer(buf_),
            [self = shared_from_this()](const boost::system::error_code &ec, std::size_t n) {
              if (ec) {
                if (!self->closed_) {
                  self->closed_ = true;
                  self->node_.detach(self->cid_);
                  boost::system::error_code ignored;
                  self->socket_.close(ignored);
                }
                return;
              }
              self->node_.receive(self->cid_, BytesView(self->buf_.data(), n));
              if (self->closed_) {
                return;
              }
              if (self->expected_) {
                auto peer = self->node_.peer_of(self->cid_);
                if (peer) {
                  if (*peer != *self->expected_) {
                    log().warn("event=dial-mismatch expected={} got={}",
                               self->expected_->str(), peer->str());
                    self->node_.detach(self->cid_);
                    self->close();
                    return;
                  }
                  self->expected_.reset();
                }
              }
              self->read();
            });
      }

      void write() {
        asio::async_write(socket_, asio::buffer(out_.front()),
                          [self = shared_from_this()](const boost::system::error_code &ec,
                                                      std::size_t) {
                            if (ec) {
                              self->out_.clear();
                              return;
                            }
                            self->out_.pop_front();
                            if (!self->out_.empty() && !self->closed_) {
                              self->write();
                            }
                          });
      }

      tcp::socket socket_;
      Node &node_;
      ConnectionId cid_ = 0;
      std::optional<PeerId> expected_;
      std::array<std::uint8_t, 64 * 1024> buf_{};
      std::deque<Bytes> out_;
      bool closed_ = false;
    };
  }  // namespace

  SigningKey load_or_create_identity(const NodeConfig &config) {
    if (config.nodekey) {
      return SigningKey::from_seed(from_hex(*config.nodekey));
    }
    if (config.data_dir.empty()) {
      return SigningKey::generate();
    }
    auto path = std::filesystem::path(config.data_dir) / kNodeKeyFile;
    if (auto existing = read_file(path)) {
      try {
        return SigningKey::from_seed(from_hex(*existing));
      } catch (const Error &e) {
        throw StartupError("corrupt node key " + path.string() + ": " + e.what());
      }
    }
    auto key = SigningKey::generate();
    write_file(path, to_hex(key.seed()));
    std::filesystem::permissions(path, std::filesystem::perms::owner_read
                                           | std::filesystem::perms::owner_write);
    return key;
  }

  struct Daemon::Impl {
    explicit Impl(NodeConfig c)
        : config(std::move(c)),
          id(peer_id_from_key(load_or_create_identity(config).public_key())),
          runtime(io),
          node(config, id, runtime),
          acceptor(io) {}

    void accept() {
      acceptor.async_accept([this](const boost::system::error_code &ec, tcp::socket socket) {
        if (ec) {
          return;
        }
        if (node.running()) {
          auto link = std::make_shared<TcpLink>(std::move(socket), node);
          links.push_back(link);
          link->begin(node.attach(link), std::nullopt);
        }
        accept();
      });
    }

    void dial(const Multiaddr &addr) {
      auto socket = std::make_shared<tcp::socket>(io);
      tcp::endpoint ep(asio::ip::make_address_v4(addr.ip.str()), addr.port);
      socket->async_connect(ep, [this, socket, addr](const boost::system::error_code &ec) {
        if (ec) {
          log().warn("peer={} event=dial-failed addr={} error=\"{}\"", id.str(), addr.str(),
                     ec.message());
          return;
        }
        if (!node.running()) {
          return;
        }
        auto link = std::make_shared<TcpLink>(std::move(*socket), node);
        links.push_back(link);
        link->begin(node.attach(link), addr.peer);
      });
      pending_dials.push_back(socket);
    }

    void on_loop(const std::function<void()> &fn) {
      if (!thread.joinable() || std::this_thread::get_id() == thread.get_id()) {
        fn();
        return;
      }
      std::promise<void> done;
      asio::post(io, [&] {
        try {
          fn();
          done.set_value();
        } catch (...) {
          done.set_exception(std::current_exception());
        }
      });
      done.get_future().get();
    }

    NodeConfig config;
    PeerId id;
    asio::io_context io;
    AsioRuntime runtime;
    Node node;
    tcp::acceptor acceptor;
    std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
    std::thread thread;
    std::vector<std::weak_ptr<TcpLink>> links;
    std::vector<std::shared_ptr<tcp::socket>> pending_dials;
    std::unique_ptr<RpcService> rpc;
    std::unique_ptr<RpcHttpServer> http;
    std::uint16_t listen_port = 0;
    bool started = false;
    bool stopped = false;
  };

  Daemon::Daemon(NodeConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

  Daemon::~Daemon() {
    stop();
  }

  const PeerId &Daemon::id() const {
    return impl_->id;
  }

  std::uint16_t Daemon::listen_port() const {
    return impl_->listen_port;
  }

  std::uint16_t Daemon::rpc_port() const {
    return impl_->http ? impl_->http->port() : 0;
  }

  void Daemon::start() {
    auto &d = *impl_;
    if (d.started) {
      return;
    }
    d.node.start();

    try {
      tcp::endpoint ep(tcp::v4(), d.config.listen_port);
      d.acceptor.open(ep.protocol());
      d.acceptor.set_option(tcp::acceptor::reuse_address(true));
      d.acceptor.bind(ep);
      d.acceptor.listen();
      d.listen_port = d.acceptor.local_endpoint().port();
    } catch (const boost::system::system_error &e) {
      d.node.stop();
      throw StartupError("cannot listen on port " + std::to_string(d.config.listen_port)
                         + ": " + e.what());
    }
    d.accept();

    auto listen = "/ip4/0.0.0.0/tcp/" + std::to_string(d.listen_port) + "/p2p/" + d.id.str();
    if (d.config.rpc) {
      d.rpc = std::make_unique<RpcService>(d.node, std::vector<std::string>{listen});
      d.http = std::make_unique<RpcHttpServer>(
          *d.rpc, [&io = d.io](std::function<void()> fn) { asio::post(io, std::move(fn)); });
      try {
        d.http->start(d.config.rpc_address, d.config.rpc_port);
      } catch (...) {
        d.http.reset();
        d.acceptor.close();
        d.node.stop();
        throw;
      }
    }

    std::uint64_t last_seq = 0;
    std::optional<std::filesystem::path> seq_path;
    if (!d.config.data_dir.empty()) {
      seq_path = std::filesystem::path(d.config.data_dir) / kPeerListSeqFile;
      if (auto s = read_file(*seq_path)) {
        try {
          last_seq = std::stoull(*s);
        } catch (const std::exception &) {
          log().warn("peer={} event=bad-seq-file path={}", d.id.str(), seq_path->string());
        }
      }
    }
    auto boot = bootstrap(d.config.staticnode, d.config.peer_list_url, d.config.peer_list_key,
                          last_seq);
    if (boot.error) {
      log().warn("peer={} event=peer-list-rejected error=\"{}\"", d.id.str(), *boot.error);
    }
    if (seq_path && boot.last_seen_seq != last_seq) {
      write_file(*seq_path, std::to_string(boot.last_seen_seq));
    }
    for (const auto &addr : boot.dial_list) {
      if (addr.peer != d.id) {
        d.dial(addr);
      }
    }

    d.work.emplace(asio::make_work_guard(d.io));
    d.thread = std::thread([&io = d.io] { io.run(); });
    d.started = true;
    log().info("peer={} event=listening port={}", d.id.str(), d.listen_port);
  }

  void Daemon::stop() {
    auto &d = *impl_;
    if (!d.started || d.stopped) {
      return;
    }
    d.stopped = true;
    if (d.http) {
      d.http->stop();
    }
    d.on_loop([&] {
      boost::system::error_code ec;
      d.acceptor.close(ec);
      for (auto &s : d.pending_dials) {
        s->close(ec);
      }
      d.node.stop();
      for (auto &w : d.links) {
        if (auto l = w.lock()) {
          l->close();
        }
      }
    });
    d.work.reset();
    d.io.stop();
    d.thread.join();
  }

  void Daemon::dial(const Multiaddr &addr) {
    impl_->on_loop([&] { impl_->dial(addr); });
  }

  void Daemon::with_node(const std::function<void(Node &)> &fn) {
    impl_->on_loop([&] { fn(impl_->node); });
  }

}  // namespace waku
