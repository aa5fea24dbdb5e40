#include "touchsplat/mesh_io.hpp"

#include "touchsplat/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace touchsplat {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_exact(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), std::streamsize(bytes));
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "obj") return load_obj(path);
  if (ext == "ply") return load_ply_mesh(path);
  throw Error("load_mesh: unsupported extension on " + path);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_obj: cannot open " + path);

  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        throw Error("load_obj: malformed vertex in " + path);
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      // Face entries may be v, v/vt, v//vn, or v/vt/vn; only the vertex
      // index is used. Negative indices count from the end.
      std::vector<std::uint32_t> ids;
      std::string item;
      while (ls >> item) {
        const std::string head = item.substr(0, item.find('/'));
        long idx = 0;
        try {
          idx = std::stol(head);
        } catch (...) {
          throw Error("load_obj: malformed face in " + path);
        }
        if (idx < 0) idx = long(mesh.vertices.size()) + idx + 1;
        if (idx < 1 || std::size_t(idx) > mesh.vertices.size())
          throw Error("load_obj: face index out of range in " + path);
        ids.push_back(std::uint32_t(idx - 1));
      }
      if (ids.size() < 3) throw Error("load_obj: face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < ids.size(); ++k)
        mesh.triangles.push_back({ids[0], ids[k], ids[k + 1]});
    }
  }
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw Error("load_obj: no geometry in " + path);
  mesh.finalize();
  return mesh;
}

namespace {

struct PlyProperty {
  std::string type;  // float, double, uchar, int, ...
  std::string name;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::size_t scalar_bytes(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw Error("PLY: unknown scalar type " + t);
}

double read_binary_scalar(std::istream& in, const std::string& t) {
  unsigned char buf[8];
  const std::size_t n = scalar_bytes(t);
  in.read(reinterpret_cast<char*>(buf), std::streamsize(n));
  if (!in) throw Error("PLY: truncated binary data");
  if (t == "float" || t == "float32") {
    float v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (t == "double" || t == "float64") {
    double v;
    std::memcpy(&v, buf, 8);
    return v;
  }
  // Integer types, little endian.
  std::uint64_t raw = 0;
  for (std::size_t i = 0; i < n; ++i) raw |= std::uint64_t(buf[i]) << (8 * i);
  const bool is_signed = t[0] == 'c' || t[0] == 's' || (t[0] == 'i' && t != "uint");
  if (is_signed) {
    // Sign-extend from n bytes.
    const std::uint64_t sign_bit = std::uint64_t(1) << (8 * n - 1);
    if (raw & sign_bit) raw |= ~((sign_bit << 1) - 1);
    return double(std::int64_t(raw));
  }
  return double(raw);
}

}  // namespace

TriangleMesh load_ply_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_ply_mesh: cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw Error("load_ply_mesh: missing magic in " + path);

  std::string format;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      ls >> format;
      if (format != "ascii" && format != "binary_little_endian")
        throw Error("load_ply_mesh: unsupported format " + format);
    } else if (tag == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) throw Error("load_ply_mesh: property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }

  const bool binary = format == "binary_little_endian";
  TriangleMesh mesh;

  auto next_ascii = [&in]() {
    double v;
    if (!(in >> v)) throw Error("load_ply_mesh: truncated ASCII data");
    return v;
  };

  for (const PlyElement& el : elements) {
    for (std::size_t i = 0; i < el.count; ++i) {
      Vec3 pos = Vec3::Zero();
      std::vector<long> face;
      for (const PlyProperty& p : el.props) {
        if (p.is_list) {
          const std::size_t cnt = std::size_t(
              binary ? read_binary_scalar(in, p.count_type) : next_ascii());
          std::vector<long> vals(cnt);
          for (std::size_t k = 0; k < cnt; ++k)
            vals[k] = long(binary ? read_binary_scalar(in, p.type) : next_ascii());
          if (el.name == "face" &&
              (p.name == "vertex_indices" || p.name == "vertex_index"))
            face = std::move(vals);
        } else {
          const double v = binary ? read_binary_scalar(in, p.type) : next_ascii();
          if (el.name == "vertex") {
            if (p.name == "x") pos.x() = v;
            else if (p.name == "y") pos.y() = v;
            else if (p.name == "z") pos.z() = v;
          }
        }
      }
      if (el.name == "vertex") mesh.vertices.push_back(pos);
      if (!face.empty()) {
        for (long id : face)
          if (id < 0 || std::size_t(id) >= mesh.vertices.size())
            throw Error("load_ply_mesh: face index out of range");
        for (std::size_t k = 1; k + 1 < face.size(); ++k)
          mesh.triangles.push_back({std::uint32_t(face[0]),
                                    std::uint32_t(face[k]),
                                    std::uint32_t(face[k + 1])});
      }
    }
  }
  if (mesh.vertices.empty())
    throw Error("load_ply_mesh: no vertices in " + path);
  mesh.finalize();
  return mesh;
}

void write_ply_points(const std::string& path, const std::vector<Vec3>& points,
                      const std::vector<Vec3>& normals) {
  if (!normals.empty() && normals.size() != points.size())
    throw Error("write_ply_points: normals/points size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_ply_points: cannot open " + path);

  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (!normals.empty())
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  out << "end_header\n";

  for (std::size_t i = 0; i < points.size(); ++i) {
    float buf[6];
    int n = 3;
    buf[0] = float(points[i].x());
    buf[1] = float(points[i].y());
    buf[2] = float(points[i].z());
    if (!normals.empty()) {
      buf[3] = float(normals[i].x());
      buf[4] = float(normals[i].y());
      buf[5] = float(normals[i].z());
      n = 6;
    }
    write_exact(out, buf, sizeof(float) * std::size_t(n));
  }
  if (!out) throw Error("write_ply_points: write failed on " + path);
}

void write_ply_model(const std::string& path,
                     const std::vector<GaussianPrimitive>& gaussians) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_ply_model: cannot open " + path);

  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << gaussians.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar origin\n"
      << "end_header\n";

  for (const GaussianPrimitive& g : gaussians) {
    float xyz[3] = {float(g.mu.x()), float(g.mu.y()), float(g.mu.z())};
    write_exact(out, xyz, sizeof(xyz));
    const unsigned char origin = g.origin == Origin::Touch ? 1 : 0;
    write_exact(out, &origin, 1);
  }
  if (!out) throw Error("write_ply_model: write failed on " + path);
}

}  // namespace touchsplat
