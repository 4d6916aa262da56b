#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "owcsim/receiver.hpp"
#include "owcsim/scene.hpp"

namespace owc {

class SceneError : public std::runtime_error {
 public:
  SceneError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  // 1-based line number, or 0 when the error is not tied to a line.
  int line() const { return line_; }

 private:
  int line_;
};

class SceneSyntaxError : public SceneError {
 public:
  using SceneError::SceneError;
};

class SceneSemanticError : public SceneError {
 public:
  using SceneError::SceneError;
};

// Everything a scene file can carry. The [receiver] and [tones] sections are
// optional; has_receiver records whether the former was present.
struct SceneDocument {
  Scene scene;
  ImagingReceiver receiver;
  bool has_receiver = false;
};

SceneDocument parse_scene_document(std::string_view text);
Scene parse_scene(std::string_view text);

std::string serialize_scene(const Scene& scene);
std::string serialize_scene_document(const SceneDocument& doc);

SceneDocument load_scene_file(const std::string& path);

// "room-a", "room-b", or a path to a scene file.
SceneDocument resolve_scene(const std::string& preset_or_path);

}  // namespace owc
