#pragma once

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "duet/provider/provider.hpp"

namespace duet::provider {

/// Streaming adapter for the OpenAI, Anthropic and Gemini chat APIs. Each
/// request runs on its own thread and reads the provider's SSE stream.
/// No retries: transport and HTTP failures become a terminal Error event.
class HttpProvider final : public ChatProvider {
 public:
  explicit HttpProvider(ProviderDescriptor descriptor,
                        std::shared_ptr<RequestRecorder> recorder = nullptr);
  /// Aborts in-flight requests and joins their threads.
  ~HttpProvider() override;

  HttpProvider(const HttpProvider&) = delete;
  HttpProvider& operator=(const HttpProvider&) = delete;

  const ProviderDescriptor& descriptor() const noexcept { return descriptor_; }

 private:
  struct Worker;

  void do_send_chat(ChatRequest request, EventSink sink) override;
  void run(Worker& worker, ChatRequest request, EventSink sink);
  void reap_finished();

  ProviderDescriptor descriptor_;
  std::shared_ptr<RequestRecorder> recorder_;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::list<std::shared_ptr<Worker>> workers_;
};

}  // namespace duet::provider
