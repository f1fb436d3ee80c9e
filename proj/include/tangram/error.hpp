#pragma once

#include <stdexcept>
#include <string>

namespace tangram {

enum class Errc {
  BadJson,
  BadVersion,
  UnknownPiece,
  MissingPiece,
  DuplicatePiece,
  OutOfWorkspace,
  GroundTruthOverlap,
  GenerationFailed,
  DegenerateTarget,
  EpisodeFinished,
  MetricsBeforeDone,
  InvalidArgument,
  ArchMismatch,
  Io,
  NonFiniteLoss,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace tangram
