#include <algorithm>

#include "masr/backends/http.hpp"
#include "masr/digest.hpp"
#include "masr/errors.hpp"

namespace masr {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

std::vector<FeatureVector> Encoder::embed_images(std::span<const std::filesystem::path> images) {
  std::vector<FeatureVector> out;
  out.reserve(images.size());
  for (const auto& p : images) out.push_back(embed_image(p));
  return out;
}

std::string chat_reply_text(const nlohmann::json& response) {
  try {
    const auto& content = response.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string text;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") text += part.value("text", "");
      }
      return text;
    }
    if (content.is_null()) return {};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("chat response lacks choices[0].message.content: ") + e.what());
  }
  throw Error(ErrorKind::MalformedResponse, "chat content has unexpected type");
}

std::string image_mime_type(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return "image/x-portable-anymap";
  return "application/octet-stream";
}

std::string image_data_url(const std::filesystem::path& path) {
  return "data:" + image_mime_type(path) + ";base64," + base64_encode(read_file_bytes(path));
}

HttpChatBackend::HttpChatBackend(std::shared_ptr<HttpTransport> transport, std::string model)
    : transport_(std::move(transport)), model_(std::move(model)) {}

std::string HttpChatBackend::complete(std::span<const ChatMessage> messages, ReplySchema) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  const nlohmann::json body{{"model", model_}, {"messages", std::move(msgs)}, {"temperature", 0}};
  std::string text = chat_reply_text(transport_->post_json("/chat/completions", body));
  if (trim(text).empty()) throw Error(ErrorKind::EmptyReply, "chat model returned an empty reply");
  return text;
}

HttpCaptioner::HttpCaptioner(std::shared_ptr<HttpTransport> transport, std::string model)
    : transport_(std::move(transport)), model_(std::move(model)) {}

CaptionRecord HttpCaptioner::caption_frame(const std::filesystem::path& image, FrameIndex frame,
                                           std::string_view prompt) {
  const std::string url = image_data_url(image);
  const nlohmann::json content = nlohmann::json::array({
      {{"type", "text"}, {"text", std::string(prompt)}},
      {{"type", "image_url"}, {"image_url", {{"url", url}}}},
  });
  const nlohmann::json body{{"model", model_},
                            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
                            {"temperature", 0}};
  std::string text = trim(chat_reply_text(transport_->post_json("/chat/completions", body)));
  if (text.empty()) throw Error(ErrorKind::EmptyReply, "captioner returned an empty caption for " + image.string());
  return CaptionRecord{frame, std::move(text), model_};
}

HttpEncoder::HttpEncoder(std::shared_ptr<HttpTransport> transport, std::string model, std::size_t batch_size)
    : transport_(std::move(transport)), model_(std::move(model)), batch_size_(std::max<std::size_t>(1, batch_size)) {}

std::vector<FeatureVector> HttpEncoder::request(const nlohmann::json& inputs) {
  const nlohmann::json body{{"model", model_}, {"input", inputs}};
  const nlohmann::json response = transport_->post_json("/embeddings", body);
  std::vector<FeatureVector> out(inputs.size());
  try {
    const auto& data = response.at("data");
    if (!data.is_array() || data.size() != inputs.size()) {
      throw Error(ErrorKind::MalformedResponse, "embeddings response has " + std::to_string(data.size()) +
                                                    " items for " + std::to_string(inputs.size()) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t slot = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
      if (slot >= out.size()) throw Error(ErrorKind::MalformedResponse, "embedding index out of range");
      auto values = data[i].at("embedding").get<std::vector<double>>();
      std::size_t expected = 0;
      if (!dim_.compare_exchange_strong(expected, values.size()) && expected != values.size()) {
        throw Error(ErrorKind::DimInconsistent, "encoder returned dim " + std::to_string(values.size()) +
                                                    " after " + std::to_string(expected));
      }
      out[slot] = FeatureVector::normalized(std::move(values));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("bad embeddings response: ") + e.what());
  }
  return out;
}

FeatureVector HttpEncoder::embed_image(const std::filesystem::path& image) {
  return request(nlohmann::json::array({image_data_url(image)})).front();
}

FeatureVector HttpEncoder::embed_text(std::string_view text) {
  return request(nlohmann::json::array({std::string(text)})).front();
}

std::vector<FeatureVector> HttpEncoder::embed_images(std::span<const std::filesystem::path> images) {
  std::vector<FeatureVector> out;
  out.reserve(images.size());
  for (std::size_t begin = 0; begin < images.size(); begin += batch_size_) {
    nlohmann::json inputs = nlohmann::json::array();
    const std::size_t end = std::min(images.size(), begin + batch_size_);
    for (std::size_t i = begin; i < end; ++i) inputs.push_back(image_data_url(images[i]));
    auto part = request(inputs);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace masr
