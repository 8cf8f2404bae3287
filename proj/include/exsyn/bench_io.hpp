#pragma once

#include "circuit.hpp"
#include "gates.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace exsyn
{

class bench_error : public std::runtime_error
{
public:
  bench_error( uint32_t line, std::string const& msg )
      : std::runtime_error( line ? "line " + std::to_string( line ) + ": " + msg : msg ), line_( line ) {}

  uint32_t line() const { return line_; }

private:
  uint32_t line_;
};

namespace detail
{

inline std::string trim( std::string const& s )
{
  auto b = s.find_first_not_of( " \t\r\n" );
  if ( b == std::string::npos )
    return {};
  auto e = s.find_last_not_of( " \t\r\n" );
  return s.substr( b, e - b + 1u );
}

inline bool valid_identifier( std::string const& s )
{
  if ( s.empty() )
    return false;
  for ( auto c : s )
  {
    if ( !( std::isalnum( static_cast<unsigned char>( c ) ) || c == '_' || c == '.' || c == '[' || c == ']' || c == '$' ) )
      return false;
  }
  return true;
}

inline std::string upper( std::string s )
{
  for ( auto& c : s )
    c = static_cast<char>( std::toupper( static_cast<unsigned char>( c ) ) );
  return s;
}

} // namespace detail

/*! \brief Parses the BENCH netlist dialect.
 *
 * Besides the usual `INPUT(x)`, `OUTPUT(y)` and `y = GATE(a, b)` lines the
 * reader accepts multi-output gates (`g = CSWAP(c, a, b)` binds g.0, g.1,
 * g.2; `g[0..2] = ...` is the same), plain aliases `y = g.1`, and 0-ary
 * constants `z = CONST0()`.  Functions not known by mnemonic are looked up
 * by name in `extra` when given.
 */
inline circuit parse_bench( std::string const& text, basis const* extra = nullptr )
{
  struct gate_def
  {
    std::string name;
    boolean_function fn;
    std::vector<std::string> args;
    uint32_t line;
  };
  struct alias_def
  {
    std::string target;
    uint32_t line;
  };

  std::vector<std::pair<std::string, uint32_t>> input_names, output_names;
  std::vector<gate_def> gate_defs;
  std::map<std::string, alias_def> aliases;
  std::map<std::string, uint32_t> defined; /* name -> line */

  auto define = [&]( std::string const& name, uint32_t line ) {
    if ( !detail::valid_identifier( name ) )
      throw bench_error( line, "invalid signal name '" + name + "'" );
    auto [it, fresh] = defined.emplace( name, line );
    if ( !fresh )
      throw bench_error( line, "redefinition of signal '" + name + "' (first defined on line " + std::to_string( it->second ) + ")" );
  };

  std::istringstream in( text );
  std::string raw;
  uint32_t lineno = 0;
  while ( std::getline( in, raw ) )
  {
    ++lineno;
    auto const hash = raw.find( '#' );
    auto line = detail::trim( hash == std::string::npos ? raw : raw.substr( 0, hash ) );
    if ( line.empty() )
      continue;

    auto const eq = line.find( '=' );
    if ( eq == std::string::npos )
    {
      auto const lp = line.find( '(' );
      auto const rp = line.rfind( ')' );
      if ( lp == std::string::npos || rp == std::string::npos || rp < lp || detail::trim( line.substr( rp + 1u ) ).size() )
        throw bench_error( lineno, "syntax error: '" + line + "'" );
      auto const kw = detail::upper( detail::trim( line.substr( 0, lp ) ) );
      auto const name = detail::trim( line.substr( lp + 1u, rp - lp - 1u ) );
      if ( kw == "INPUT" )
      {
        define( name, lineno );
        input_names.emplace_back( name, lineno );
      }
      else if ( kw == "OUTPUT" )
      {
        if ( !detail::valid_identifier( name ) )
          throw bench_error( lineno, "invalid signal name '" + name + "'" );
        for ( auto const& [o, l] : output_names )
        {
          if ( o == name )
            throw bench_error( lineno, "output '" + name + "' declared twice" );
        }
        output_names.emplace_back( name, lineno );
      }
      else
      {
        throw bench_error( lineno, "syntax error: unknown directive '" + kw + "'" );
      }
      continue;
    }

    auto lhs = detail::trim( line.substr( 0, eq ) );
    auto rhs = detail::trim( line.substr( eq + 1u ) );
    if ( lhs.empty() || rhs.empty() )
      throw bench_error( lineno, "syntax error: '" + line + "'" );

    /* g[0..2] = ... */
    if ( auto const lb = lhs.find( '[' ); lb != std::string::npos && lhs.back() == ']' )
    {
      lhs = detail::trim( lhs.substr( 0, lb ) );
    }

    auto const lp = rhs.find( '(' );
    if ( lp == std::string::npos )
    {
      if ( !detail::valid_identifier( rhs ) )
        throw bench_error( lineno, "syntax error: '" + line + "'" );
      define( lhs, lineno );
      aliases[lhs] = {rhs, lineno};
      continue;
    }
    auto const rp = rhs.rfind( ')' );
    if ( rp == std::string::npos || rp < lp || !detail::trim( rhs.substr( rp + 1u ) ).empty() )
      throw bench_error( lineno, "syntax error: unbalanced parentheses" );
    auto const mnemonic = detail::trim( rhs.substr( 0, lp ) );
    std::vector<std::string> args;
    auto const arglist = detail::trim( rhs.substr( lp + 1u, rp - lp - 1u ) );
    if ( !arglist.empty() )
    {
      std::istringstream as( arglist );
      std::string a;
      while ( std::getline( as, a, ',' ) )
      {
        a = detail::trim( a );
        if ( !detail::valid_identifier( a ) )
          throw bench_error( lineno, "syntax error: bad argument '" + a + "'" );
        args.push_back( a );
      }
    }
    auto const um = detail::upper( mnemonic );
    std::optional<boolean_function> fn = gates::by_mnemonic( um, static_cast<uint32_t>( args.size() ) );
    if ( !fn && extra )
    {
      for ( auto const& f : extra->functions )
      {
        if ( f.name() == mnemonic && f.num_inputs() == args.size() )
        {
          fn = f;
          break;
        }
      }
    }
    if ( !fn )
    {
      if ( gates::is_known_mnemonic( um ) )
        throw bench_error( lineno, "gate " + um + " does not take " + std::to_string( args.size() ) + " arguments" );
      throw bench_error( lineno, "unknown gate mnemonic '" + mnemonic + "'" );
    }
    define( lhs, lineno );
    gate_defs.push_back( {lhs, *fn, std::move( args ), lineno} );
  }

  circuit c;
  std::map<std::string, uint32_t> node_of;
  for ( auto const& [name, l] : input_names )
    node_of[name] = c.add_input( name );
  for ( auto const& g : gate_defs )
    node_of[g.name] = c.add_node( g.fn, {}, g.name );

  auto resolve = [&]( std::string const& ref, uint32_t line ) {
    std::string r = ref;
    for ( auto hops = 0u;; ++hops )
    {
      if ( hops > aliases.size() )
        throw bench_error( line, "alias cycle through '" + ref + "'" );
      auto it = aliases.find( r );
      if ( it == aliases.end() )
        break;
      r = it->second.target;
    }
    if ( auto it = node_of.find( r ); it != node_of.end() )
    {
      return signal{it->second, 0u};
    }
    auto const dot = r.rfind( '.' );
    if ( dot != std::string::npos )
    {
      auto const base = r.substr( 0, dot );
      auto const idx = r.substr( dot + 1u );
      if ( !idx.empty() && std::all_of( idx.begin(), idx.end(), []( char ch ) { return std::isdigit( static_cast<unsigned char>( ch ) ); } ) )
      {
        if ( auto it = node_of.find( base ); it != node_of.end() )
        {
          auto const k = static_cast<uint32_t>( std::stoul( idx ) );
          auto const& nd = c.node( it->second );
          if ( !nd.fn || k >= nd.fn->num_outputs() )
            throw bench_error( line, "signal '" + base + "' has no output " + idx );
          return signal{it->second, k};
        }
      }
    }
    throw bench_error( line, "undefined signal '" + ref + "'" );
  };

  for ( auto const& g : gate_defs )
  {
    auto const id = node_of[g.name];
    for ( auto i = 0u; i < g.args.size(); ++i )
      c.add_edge( resolve( g.args[i], g.line ), id, i );
  }
  for ( auto const& [name, l] : output_names )
    c.add_output( name, resolve( name, l ) );

  auto const rep = validate( c );
  if ( rep.has( "cycle" ) )
    throw bench_error( 0, "netlist contains a combinational cycle" );
  return c;
}

inline circuit read_bench_file( std::string const& path, basis const* extra = nullptr )
{
  std::ifstream f( path );
  if ( !f )
    throw std::runtime_error( "cannot open " + path );
  std::stringstream ss;
  ss << f.rdbuf();
  auto c = parse_bench( ss.str(), extra );
  auto name = path;
  if ( auto s = name.find_last_of( '/' ); s != std::string::npos )
    name = name.substr( s + 1u );
  if ( auto d = name.rfind( '.' ); d != std::string::npos )
    name = name.substr( 0, d );
  c.set_name( name );
  return c;
}

/*! \brief Writes a circuit in the BENCH dialect accepted by parse_bench. */
inline std::string serialize_bench( circuit const& c )
{
  std::ostringstream os;
  if ( !c.name().empty() )
    os << "# " << c.name() << "\n";

  std::set<std::string> used;
  std::vector<std::string> names( c.num_nodes() );
  for ( auto n : c.inputs() )
  {
    names[n] = c.node( n ).input_name;
    used.insert( names[n] );
  }
  std::set<std::string> po_names;
  for ( auto const& o : c.outputs() )
    po_names.insert( o.name );

  /* a single-output gate driving exactly one output takes the output's name */
  std::map<uint32_t, uint32_t> drive_count;
  for ( auto const& o : c.outputs() )
    ++drive_count[o.driver.node];
  std::set<std::string> claimed;
  for ( auto const& o : c.outputs() )
  {
    auto const n = o.driver.node;
    auto const& nd = c.node( n );
    if ( nd.fn && nd.fn->num_outputs() == 1u && drive_count[n] == 1u && !used.count( o.name ) && names[n].empty() )
    {
      names[n] = o.name;
      used.insert( o.name );
      claimed.insert( o.name );
    }
  }
  for ( auto i = 0u; i < c.num_nodes(); ++i )
  {
    if ( !names[i].empty() || !c.node( i ).fn )
      continue;
    auto const& label = c.node( i ).label;
    if ( detail::valid_identifier( label ) && !used.count( label ) && !po_names.count( label ) &&
         label.find( '.' ) == std::string::npos )
    {
      names[i] = label;
    }
    else
    {
      auto base = "n" + std::to_string( i );
      auto cand = base;
      for ( auto k = 0u; used.count( cand ) || po_names.count( cand ); ++k )
        cand = base + "_" + std::to_string( k );
      names[i] = cand;
    }
    used.insert( names[i] );
  }

  auto ref = [&]( signal s ) {
    auto const& nd = c.node( s.node );
    if ( nd.fn && nd.fn->num_outputs() > 1u )
      return names[s.node] + "." + std::to_string( s.index );
    return names[s.node];
  };

  for ( auto n : c.inputs() )
    os << "INPUT(" << names[n] << ")\n";
  for ( auto const& o : c.outputs() )
    os << "OUTPUT(" << o.name << ")\n";
  for ( auto i = 0u; i < c.num_nodes(); ++i )
  {
    auto const& nd = c.node( i );
    if ( !nd.fn )
      continue;
    os << names[i] << " = " << nd.fn->name() << "(";
    auto const fi = c.fanins( i );
    for ( auto k = 0u; k < fi.size(); ++k )
      os << ( k ? ", " : "" ) << ref( fi[k] );
    os << ")\n";
  }
  for ( auto const& o : c.outputs() )
  {
    if ( claimed.count( o.name ) || ref( o.driver ) == o.name )
      continue;
    os << o.name << " = " << ref( o.driver ) << "\n";
  }
  return os.str();
}

} // namespace exsyn
