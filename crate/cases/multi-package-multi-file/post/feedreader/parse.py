import feedparser
from bs4 import BeautifulSoup
