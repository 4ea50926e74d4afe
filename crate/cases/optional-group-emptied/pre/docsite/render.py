import jinja2
import markdown
