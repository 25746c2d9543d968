"""
Reading and writing of scene zone descriptions.

The zone files use the following XML dialect:

    <Zone ident = "9" name = "ZoneIOLeftTop" plane_name = "ground">
      <Properties_list>
        <Property name = "In_out_zone:Entry"/>
      </Properties_list>
      <Outline_list>
        <Point x="-830.0" y="-350.0" z = "0"/>
        ...
      </Outline_list>
    </Zone>

A document may consist of a single Zone element or of any root element containing several.

Only "In_out_zone:Entry" and "Lost_found_zone:Yes" appear in the original zone files; the
remaining property strings below are a convention of this toolkit.
"""
import re
import xml.etree.ElementTree as ET

from .exceptions import UnsupportedZoneKindError, ValidationError, ZoneFileError
from .model import GROUND_PLANE, GroundPoint, Zone, ZoneKind

PROPERTY_TO_KIND = {
    "In_out_zone:Entry": ZoneKind.ENTRY,
    "In_out_zone:Exit": ZoneKind.EXIT,
    "In_out_zone:InOut": ZoneKind.IN_OUT,
    "Lost_found_zone:Lost": ZoneKind.LOST,
    "Lost_found_zone:Found": ZoneKind.FOUND,
    "Lost_found_zone:Yes": ZoneKind.LOST_FOUND,
}
KIND_TO_PROPERTY = {kind: name for name, kind in PROPERTY_TO_KIND.items()}

ROOT_TAG = "Zone_list"

_XML_DECLARATION = re.compile(r"^\s*<\?xml[^>]*\?>", re.DOTALL)


def _strip_declaration(text):
    # Keep the line structure intact, so that parser line numbers refer to the original text
    match = _XML_DECLARATION.match(text)
    if not match:
        return text
    return "\n" * match.group(0).count("\n") + text[match.end():]


def _parse_float(element, attribute, default=None):
    value = element.get(attribute)
    if value is None:
        if default is not None:
            return default
        raise ZoneFileError(f"<{element.tag}> element is missing the {attribute!r} attribute")
    try:
        return float(value)
    except ValueError:
        raise ZoneFileError(f"<{element.tag}> attribute {attribute}={value!r} is not a number") from None


def _parse_zone(element):
    ident_str = element.get("ident")
    if ident_str is None:
        raise ZoneFileError("<Zone> element is missing the 'ident' attribute")
    try:
        ident = int(ident_str.strip())
    except ValueError:
        raise ZoneFileError(f"Zone ident {ident_str!r} is not an integer") from None

    name = element.get("name", "")
    plane_name = element.get("plane_name", GROUND_PLANE)

    # Zone kind, from the property list
    kinds = []
    for prop in element.iter("Property"):
        prop_name = (prop.get("name") or "").strip()
        if prop_name not in PROPERTY_TO_KIND:
            raise UnsupportedZoneKindError(f"Zone {ident}: unsupported zone property {prop_name!r}")
        kinds.append(PROPERTY_TO_KIND[prop_name])

    if not kinds:
        raise ZoneFileError(f"Zone {ident}: no zone kind property")
    if len(set(kinds)) > 1:
        raise ZoneFileError(f"Zone {ident}: conflicting zone kind properties")

    # Outline, in document order
    outline = [
        GroundPoint(
            _parse_float(point, "x"),
            _parse_float(point, "y"),
            _parse_float(point, "z", default=0.0),
        ) for point in element.iter("Point")
    ]

    return Zone(ident=ident, name=name, kind=kinds[0], outline=outline, plane_name=plane_name)


def parse_zone_file(text):
    """
    Parse a zone XML document.

    Parameters
    ----------
    text : str
        The document text.

    Returns
    -------
    zones : list of Zone
        One zone per Zone element, in document order.

    Raises
    ------
    ZoneFileError
        If the document is malformed (with the line number of the problem).
    UnsupportedZoneKindError
        If a zone property string is not recognized.
    GeometryError
        If a zone outline has fewer than three points or is otherwise invalid.
    """
    text = _strip_declaration(text)

    # Wrap in a synthetic root on the same line, so that several top-level Zone elements are
    # accepted and line numbers are preserved
    try:
        root = ET.fromstring(f"<_document>{text}</_document>")
    except ET.ParseError as e:
        line, _ = e.position
        raise ZoneFileError(f"Malformed zone document: {e}", line=line) from None

    return [_parse_zone(element) for element in root.iter("Zone")]


def _format_number(value):
    # Shortest representation that round-trips exactly
    return repr(float(value))


def serialize_zones(zones):
    """
    Serialize zones to the zone XML dialect.

    Parameters
    ----------
    zones : iterable of Zone
        Zones to serialize.

    Returns
    -------
    text : str
        XML document with a Zone_list root element containing one Zone element per zone.
    """
    root = ET.Element(ROOT_TAG)

    for zone in zones:
        zone_element = ET.SubElement(root, "Zone", {
            'ident': str(zone.ident),
            'name': zone.name,
            'plane_name': zone.plane_name,
        })

        properties = ET.SubElement(zone_element, "Properties_list")
        ET.SubElement(properties, "Property", {'name': KIND_TO_PROPERTY[zone.kind]})

        outline = ET.SubElement(zone_element, "Outline_list")
        for point in zone.outline:
            ET.SubElement(outline, "Point", {
                'x': _format_number(point.x),
                'y': _format_number(point.y),
                'z': _format_number(point.z),
            })

    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="unicode") + "\n"


def load_zone_file(filename):
    """
    Load zones from the specified zone XML file.

    Parameters
    ----------
    filename : str
        Name of the zone file to load.

    Returns
    -------
    zones : list of Zone
        The zones, in document order.
    """
    with open(filename, 'r', encoding='utf-8') as fp:
        text = fp.read()

    try:
        return parse_zone_file(text)
    except ValidationError as e:
        raise e.with_source(filename)


def save_zone_file(filename, zones):
    """Write zones to the specified file in the zone XML dialect."""
    with open(filename, 'w', encoding='utf-8', newline='\n') as fp:
        fp.write(serialize_zones(zones))
