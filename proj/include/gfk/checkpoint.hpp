#ifndef GFK_CHECKPOINT_HPP
#define GFK_CHECKPOINT_HPP

#include <map>
#include <string>
#include <vector>

namespace gfk {

// Versioned binary container ("GFK1", little-endian): string metadata plus
// named flat f64 arrays. Shared by field models, temporal cells and the GAN.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, std::vector<double>> arrays;
};

void write_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace gfk

#endif
